#include <random>
#include <sstream>

#include "cellplan/planner.hpp"
#include "doctest.h"

using namespace cellplan;

namespace {

FemtoDatabase chain() {
  return FemtoDatabase({{"A", 0, 0, 10, {"B"}}, {"B", 0, 0, 10, {"A", "C"}}, {"C", 0, 0, 10, {"B"}}});
}

CellLoads flat(double a, double b, double c) {
  return {{"A", std::vector<double>(144, a)}, {"B", std::vector<double>(144, b)}, {"C", std::vector<double>(144, c)}};
}

std::size_t count_off(const Plan& p, const std::string& id) {
  std::size_t n = 0;
  for (const auto& a : p.actions) n += a.cell_id == id && a.action == Action::Off;
  return n;
}

}  // namespace

TEST_CASE("a lightly loaded cell hands its load to a neighbour") {
  const auto db = chain();
  const auto loads = flat(1, 5, 8);
  const auto p = plan(loads, {}, db, {});
  CHECK(p.actions.size() == 3 * 144);
  CHECK(count_off(p, "A") == 144);
  CHECK(count_off(p, "B") == 0);
  CHECK(count_off(p, "C") == 0);
  const auto ev = evaluate_plan(p.actions, loads, db, {});
  CHECK(ev.qos_violations == 0);
  CHECK(ev.energy_saved == doctest::Approx(1.0 / 3.0));
  CHECK(ev.cell_intervals == 3 * 144);
}

TEST_CASE("no Off decision when the host would pass the overload threshold") {
  const auto db = chain();
  const auto p = plan(flat(1, 8.5, 12), {}, db, {});
  CHECK(count_off(p, "A") == 0);
  // C sheds 0.5 into B and stays at 11.5 > 9: whitespace flag on C only
  for (const auto& a : p.actions) CHECK(a.whitespace_flag == (a.cell_id == "C"));
  CHECK(evaluate_plan(p.actions, flat(1, 8.5, 12), db, {}).qos_violations == 0);
}

TEST_CASE("neighbours of an overloaded cell stay On") {
  const FemtoDatabase db({{"A", 0, 0, 10, {"B", "C"}}, {"B", 0, 0, 10, {"A"}}, {"C", 0, 0, 10, {"A"}}});
  CellLoads loads{{"A", std::vector<double>(144, 9.5)}, {"B", std::vector<double>(144, 0.5)},
                  {"C", std::vector<double>(144, 0.5)}};
  const auto p = plan(loads, {}, db, {});
  CHECK(count_off(p, "B") == 0);
  CHECK(count_off(p, "C") == 0);
}

TEST_CASE("Off eligibility needs a sustained low run") {
  const auto db = chain();
  auto loads = flat(8, 5, 5);
  loads["A"][10] = loads["A"][11] = 1;  // run of 2: never eligible
  loads["A"][50] = loads["A"][51] = loads["A"][52] = 1;  // run of 3
  const auto p = plan(loads, {}, db, {});
  CHECK(count_off(p, "A") == 3);
  for (const auto& a : p.actions)
    if (a.cell_id == "A" && a.action == Action::Off) CHECK((a.interval >= 51 && a.interval <= 53));
  QosConfig q;
  q.min_off_run = 1;
  CHECK(count_off(plan(loads, {}, db, q), "A") == 5);
}

TEST_CASE("evaluation counts overloads and stranded Off cells") {
  const auto db = chain();
  const auto p = plan(flat(1, 5, 8), {}, db, {});
  // A actually carries 7: B reaches 12, sheds 1 to C, stays at 11 > 10
  CHECK(evaluate_plan(p.actions, flat(7, 5, 8), db, {}).qos_violations == 144);
  CHECK(evaluate_plan(p.actions, flat(5, 5, 8), db, {}).qos_violations == 0);

  const FemtoDatabase lone({{"D", 0, 0, 5, {}}});
  const std::vector<PlanAction> off{{"D", 1, Action::Off, false}};
  QosConfig q;
  q.horizon = 1;
  CellLoads busy{{"D", std::vector<double>(144, 2.0)}};
  CellLoads idle{{"D", std::vector<double>(144, 0.0)}};
  CHECK(evaluate_plan(off, busy, lone, q).qos_violations == 1);
  CHECK(evaluate_plan(off, idle, lone, q).qos_violations == 0);
  const std::vector<PlanAction> late{{"D", 2, Action::Off, false}};
  CHECK_THROWS_AS(evaluate_plan(late, idle, lone, q), InvalidArgument);
}

TEST_CASE("safety and monotonicity on random meshes") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<FemtoRecord> recs(n);
    for (std::size_t i = 0; i < n; ++i) {
      recs[i].cell_id = "c" + std::to_string(i);
      recs[i].capacity = 1 + static_cast<int>(rng() % 20);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (u(rng) < 0.5) {
          recs[i].neighbors.insert(recs[j].cell_id);
          recs[j].neighbors.insert(recs[i].cell_id);
        }
    const FemtoDatabase db(recs);
    CellLoads loads;
    for (const auto& r : recs) {
      auto& v = loads[r.cell_id];
      for (int t = 0; t < 144; ++t) v.push_back(u(rng) * 1.2 * r.capacity * (t % 48 < 24 ? 0.3 : 1.0));
    }
    QosConfig lo, hi;
    lo.off_threshold = 0.1;
    hi.off_threshold = 0.3;
    const auto a = evaluate_plan(plan(loads, {}, db, lo).actions, loads, db, lo);
    const auto b = evaluate_plan(plan(loads, {}, db, hi).actions, loads, db, hi);
    CHECK(a.qos_violations == 0);
    CHECK(b.qos_violations == 0);
    CHECK(b.energy_saved >= a.energy_saved);
  }
}

TEST_CASE("database validation and I/O") {
  CHECK_THROWS_AS(FemtoDatabase({{"A", 0, 0, 10, {"B"}}, {"B", 0, 0, 10, {}}}), InvalidArgument);
  CHECK_THROWS_AS(FemtoDatabase({{"A", 0, 0, 10, {"Z"}}}), InvalidArgument);
  CHECK_THROWS_AS(FemtoDatabase({{"A", 0, 0, 0, {}}}), InvalidArgument);
  std::stringstream io;
  write_femto_db(io, chain());
  const auto back = read_femto_db(io);
  CHECK(back.size() == 3);
  CHECK(back.at("B").neighbors == std::set<std::string>{"A", "C"});
  CHECK_THROWS_AS(plan(CellLoads{{"Q", std::vector<double>(144, 1)}}, {}, chain(), {}), InvalidArgument);
  CHECK_THROWS_AS(plan(CellLoads{{"A", std::vector<double>(24, 1)}}, {}, chain(), {}), DimensionError);
}

TEST_CASE("plan file round trip") {
  auto p = plan(flat(1, 5, 8), {{"A", ClassLabel::EveningPeak}}, chain(), {});
  std::stringstream io;
  write_plan(io, p);
  const auto back = read_plan(io);
  CHECK(back.actions == p.actions);
  CHECK(back.classes == p.classes);
  CHECK(io.str().find("cell_id,interval,action,whitespace_flag") != std::string::npos);
}
