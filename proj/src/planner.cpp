#include "cellplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace cellplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense per-interval view of the cell graph, indexed in id order.
struct Topology {
  std::vector<std::string> ids;
  std::vector<double> capacity;
  std::vector<std::vector<std::size_t>> neighbors;  // ascending index == ascending id
};

Topology topology_of(const FemtoDatabase& db, const std::vector<std::string>& ids) {
  Topology topo;
  topo.ids = ids;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;
  for (const auto& id : ids) {
    const auto& rec = db.at(id);
    topo.capacity.push_back(static_cast<double>(rec.capacity));
    std::vector<std::size_t> nbrs;
    for (const auto& n : rec.neighbors)
      if (auto it = index.find(n); it != index.end()) nbrs.push_back(it->second);
    std::sort(nbrs.begin(), nbrs.end());
    topo.neighbors.push_back(std::move(nbrs));
  }
  return topo;
}

std::vector<std::string> validated_cells(const CellLoads& loads, const FemtoDatabase& db, const char* what) {
  std::vector<std::string> ids;
  for (const auto& [id, v] : loads) {
    if (!db.contains(id)) throw InvalidArgument(std::string(what) + ": unknown cell_id '" + id + "'");
    require_dimension(std::string(what) + " for cell '" + id + "'", kBinsPerDay, v.size());
    for (double x : v)
      if (!(x >= 0.0) || !std::isfinite(x))
        throw InvalidArgument(std::string(what) + ": loads must be finite and non-negative (cell '" + id + "')");
    ids.push_back(id);
  }
  return ids;  // std::map iteration: ascending id
}

// Smallest window maximum of utilization over runs of `run` consecutive
// intervals (within [0, horizon)) that contain t. Infinity if none fits.
std::vector<std::vector<double>> activation_levels(const Topology& topo, const CellLoads& loads, int horizon, int run) {
  std::vector<std::vector<double>> act(topo.ids.size(), std::vector<double>(static_cast<std::size_t>(horizon), kInf));
  for (std::size_t c = 0; c < topo.ids.size(); ++c) {
    const auto& v = loads.at(topo.ids[c]);
    for (int start = 0; start + run <= horizon; ++start) {
      double window_max = 0.0;
      for (int t = start; t < start + run; ++t) window_max = std::max(window_max, v[static_cast<std::size_t>(t)] / topo.capacity[c]);
      for (int t = start; t < start + run; ++t) {
        auto& a = act[c][static_cast<std::size_t>(t)];
        a = std::min(a, window_max);
      }
    }
  }
  return act;
}

std::size_t least_utilized_on_neighbor(const Topology& topo, std::size_t c, const std::vector<double>& assigned,
                                       const std::vector<char>& off) {
  std::size_t best = topo.ids.size();
  double best_u = kInf;
  for (std::size_t n : topo.neighbors[c]) {
    if (off[n]) continue;
    const double u = assigned[n] / topo.capacity[n];
    if (u < best_u) {  // neighbours ascend by id, so ties keep the lowest
      best_u = u;
      best = n;
    }
  }
  return best;
}

void shed_excess(const Topology& topo, std::vector<double>& assigned, const std::vector<char>& off, double overload) {
  for (std::size_t c = 0; c < topo.ids.size(); ++c) {
    if (off[c]) continue;
    double excess = assigned[c] - overload * topo.capacity[c];
    if (excess <= 0.0) continue;
    std::vector<std::size_t> order;
    for (std::size_t n : topo.neighbors[c])
      if (!off[n]) order.push_back(n);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::make_tuple(assigned[a] / topo.capacity[a], a) < std::make_tuple(assigned[b] / topo.capacity[b], b);
    });
    for (std::size_t n : order) {
      const double room = overload * topo.capacity[n] - assigned[n];
      if (room <= 0.0) continue;
      const double moved = std::min(room, excess);
      assigned[n] += moved;
      assigned[c] -= moved;
      excess -= moved;
      if (excess <= 0.0) break;
    }
  }
}

}  // namespace

FemtoDatabase::FemtoDatabase(std::vector<FemtoRecord> records) {
  for (auto& r : records) {
    if (r.cell_id.empty()) throw InvalidArgument("femto database: empty cell_id");
    if (r.capacity < 1) throw InvalidArgument("femto database: cell '" + r.cell_id + "' has capacity < 1");
    if (r.neighbors.count(r.cell_id)) throw InvalidArgument("femto database: cell '" + r.cell_id + "' lists itself as neighbour");
    const std::string id = r.cell_id;
    if (!cells_.emplace(id, std::move(r)).second) throw InvalidArgument("femto database: duplicate cell_id '" + id + "'");
  }
  for (const auto& [id, rec] : cells_) {
    for (const auto& n : rec.neighbors) {
      const auto it = cells_.find(n);
      if (it == cells_.end()) throw InvalidArgument("femto database: cell '" + id + "' lists unknown neighbour '" + n + "'");
      if (!it->second.neighbors.count(id))
        throw InvalidArgument("femto database: neighbour relation not symmetric ('" + id + "' -> '" + n + "')");
    }
  }
}

const FemtoRecord& FemtoDatabase::at(const std::string& cell_id) const {
  const auto it = cells_.find(cell_id);
  if (it == cells_.end()) throw InvalidArgument("unknown cell_id '" + cell_id + "'");
  return it->second;
}

FemtoDatabase read_femto_db(std::istream& in) {
  std::vector<FemtoRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#' || view.starts_with("cell_id")) continue;
    const auto f = split(view, ',');
    if (f.size() != 5) throw ParseError("femto database line " + std::to_string(line_no) + ": expected 5 fields");
    FemtoRecord r;
    r.cell_id = std::string(trim(f[0]));
    r.lat = parse_double(f[1]);
    r.lon = parse_double(f[2]);
    r.capacity = static_cast<int>(parse_int(f[3]));
    for (auto n : split(trim(f[4]), ';')) {
      n = trim(n);
      if (!n.empty()) r.neighbors.insert(std::string(n));
    }
    records.push_back(std::move(r));
  }
  return FemtoDatabase(std::move(records));
}

void write_femto_db(std::ostream& out, const FemtoDatabase& db) {
  out << "cell_id,lat,lon,capacity,neighbor_ids\n";
  for (const auto& [id, r] : db.cells()) {
    out << id << ',' << format_double(r.lat) << ',' << format_double(r.lon) << ',' << r.capacity << ',';
    bool first = true;
    for (const auto& n : r.neighbors) {
      if (!first) out << ';';
      out << n;
      first = false;
    }
    out << '\n';
  }
}

void QosConfig::validate() const {
  if (!(off_threshold >= 0.0 && off_threshold < 1.0)) throw InvalidArgument("off_threshold must lie in [0, 1)");
  if (!(overload_threshold > 0.0 && overload_threshold <= 1.0)) throw InvalidArgument("overload_threshold must lie in (0, 1]");
  if (!(off_threshold < overload_threshold)) throw InvalidArgument("off_threshold must be below overload_threshold");
  if (horizon < 1 || horizon > kBinsPerDay) throw InvalidArgument("horizon must lie in 1..144");
  if (min_off_run < 1) throw InvalidArgument("min_off_run must be >= 1");
}

std::string to_string(Action a) { return a == Action::On ? "On" : "Off"; }

Action parse_action(std::string_view text) {
  text = trim(text);
  if (text == "On" || text == "on") return Action::On;
  if (text == "Off" || text == "off") return Action::Off;
  throw ParseError("unknown action '" + std::string(text) + "'");
}

Plan plan(const CellLoads& predicted, const std::map<std::string, ClassLabel>& classes, const FemtoDatabase& db,
          const QosConfig& qos) {
  qos.validate();
  const auto ids = validated_cells(predicted, db, "plan");
  const Topology topo = topology_of(db, ids);
  const auto act = activation_levels(topo, predicted, qos.horizon, qos.min_off_run);
  const std::size_t n = ids.size();

  Plan out;
  for (const auto& [id, label] : classes)
    if (predicted.count(id)) out.classes[id] = label;

  std::vector<double> load(n), assigned(n);
  std::vector<char> off(n), pinned(n);
  std::vector<std::size_t> candidates;
  for (int t = 0; t < qos.horizon; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    for (std::size_t c = 0; c < n; ++c) {
      load[c] = predicted.at(ids[c])[ti];
      assigned[c] = load[c];
      off[c] = 0;
      pinned[c] = 0;
    }
    for (std::size_t c = 0; c < n; ++c)
      if (load[c] > qos.overload_threshold * topo.capacity[c])
        for (std::size_t nb : topo.neighbors[c]) pinned[nb] = 1;

    candidates.clear();
    for (std::size_t c = 0; c < n; ++c)
      if (act[c][ti] < qos.off_threshold) candidates.push_back(c);
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return std::make_tuple(act[a][ti], a) < std::make_tuple(act[b][ti], b);
    });
    for (std::size_t c : candidates) {
      if (pinned[c]) continue;
      const std::size_t host = least_utilized_on_neighbor(topo, c, assigned, off);
      if (host == n) continue;
      if (assigned[host] + load[c] > qos.overload_threshold * topo.capacity[host]) continue;
      off[c] = 1;
      assigned[host] += load[c];
      assigned[c] = 0.0;
      pinned[host] = 1;
    }
    shed_excess(topo, assigned, off, qos.overload_threshold);

    for (std::size_t c = 0; c < n; ++c) {
      const bool flag = !off[c] && assigned[c] > qos.overload_threshold * topo.capacity[c];
      out.actions.push_back({ids[c], t + 1, off[c] ? Action::Off : Action::On, flag});
    }
  }
  return out;
}

PlanEvaluation evaluate_plan(std::span<const PlanAction> actions, const CellLoads& actual, const FemtoDatabase& db,
                             const QosConfig& qos) {
  qos.validate();
  if (actions.empty()) throw InvalidArgument("evaluate_plan: empty action set");
  const auto ids = validated_cells(actual, db, "evaluate_plan");
  const Topology topo = topology_of(db, ids);
  const std::size_t n = ids.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < n; ++c) index[ids[c]] = c;

  // actions[interval][cell]: 0 missing, 1 on, 2 off; bit 4 whitespace
  std::map<int, std::vector<unsigned char>> grid;
  for (const auto& a : actions) {
    const auto it = index.find(a.cell_id);
    if (it == index.end()) throw InvalidArgument("evaluate_plan: no actual loads for cell '" + a.cell_id + "'");
    if (a.interval < 1 || a.interval > qos.horizon)
      throw InvalidArgument("evaluate_plan: interval " + std::to_string(a.interval) + " outside the planning horizon");
    auto& row = grid[a.interval];
    row.resize(n, 0);
    if (row[it->second] != 0) throw InvalidArgument("evaluate_plan: duplicate action for '" + a.cell_id + "'");
    row[it->second] = static_cast<unsigned char>((a.action == Action::Off ? 2 : 1) | (a.whitespace_flag ? 4 : 0));
  }
  for (const auto& [t, row] : grid)
    for (std::size_t c = 0; c < n; ++c)
      if (row[c] == 0) throw InvalidArgument("evaluate_plan: coverage mismatch, cell '" + ids[c] + "' lacks interval " + std::to_string(t));

  const auto act = activation_levels(topo, actual, qos.horizon, qos.min_off_run);
  PlanEvaluation ev;
  std::size_t off_count = 0;
  std::vector<double> assigned(n);
  std::vector<char> off(n);
  std::vector<std::size_t> order;
  for (const auto& [t, row] : grid) {
    const auto ti = static_cast<std::size_t>(t - 1);
    order.clear();
    for (std::size_t c = 0; c < n; ++c) {
      assigned[c] = actual.at(ids[c])[ti];
      off[c] = (row[c] & 2) != 0;
      if (off[c]) order.push_back(c);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::make_tuple(act[a][ti], a) < std::make_tuple(act[b][ti], b);
    });
    std::size_t unserved = 0;
    for (std::size_t c : order) {
      const std::size_t host = least_utilized_on_neighbor(topo, c, assigned, off);
      if (host == n) {
        if (assigned[c] > 0.0) ++unserved;
      } else {
        assigned[host] += assigned[c];
      }
      assigned[c] = 0.0;
    }
    shed_excess(topo, assigned, off, qos.overload_threshold);
    for (std::size_t c = 0; c < n; ++c) {
      ++ev.cell_intervals;
      if (off[c]) {
        ++off_count;
        continue;
      }
      if (assigned[c] > topo.capacity[c] && !(row[c] & 4)) ++ev.qos_violations;
    }
    ev.qos_violations += unserved;
  }
  ev.energy_saved = static_cast<double>(off_count) / static_cast<double>(ev.cell_intervals);
  return ev;
}

void write_plan(std::ostream& out, const Plan& p) {
  for (const auto& [id, label] : p.classes) out << "# class " << id << '=' << to_int(label) << '\n';
  out << "cell_id,interval,action,whitespace_flag\n";
  for (const auto& a : p.actions)
    out << a.cell_id << ',' << a.interval << ',' << to_string(a.action) << ',' << (a.whitespace_flag ? 1 : 0) << '\n';
}

Plan read_plan(std::istream& in) {
  Plan p;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.starts_with("cell_id")) continue;
    if (view.front() == '#') {
      constexpr std::string_view tag = "# class ";
      if (view.starts_with(tag)) {
        const auto rest = view.substr(tag.size());
        const auto eq = rest.rfind('=');
        if (eq != std::string_view::npos)
          p.classes[std::string(trim(rest.substr(0, eq)))] = class_from_int(parse_int(rest.substr(eq + 1)));
      }
      continue;
    }
    const auto f = split(view, ',');
    if (f.size() != 4) throw ParseError("plan line " + std::to_string(line_no) + ": expected 4 fields");
    p.actions.push_back({std::string(trim(f[0])), static_cast<int>(parse_int(f[1])), parse_action(f[2]),
                         parse_int(f[3]) != 0});
  }
  return p;
}

}  // namespace cellplan
