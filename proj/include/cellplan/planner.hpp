#pragma once

// Femtocell on/off planning from per-interval predicted loads.
//
// Per interval, in order:
//   1. Cells whose own predicted utilization exceeds overload_threshold pin
//      every neighbour On.
//   2. Off candidates are cells whose utilization stays below off_threshold
//      for a run of at least `min_off_run` consecutive intervals covering the
//      current one. They are visited by activation level (the smallest
//      window maximum over such runs, then cell id). A candidate goes Off
//      when its least-utilized On neighbour (ties: lowest id) can absorb its
//      load without passing overload_threshold; that neighbour is pinned On.
//   3. Remaining excess above overload_threshold is shed to On neighbours
//      with spare room below the threshold, least utilized first.
//   4. A cell still above overload_threshold gets the whitespace flag.
// Step 2 visits candidates in a threshold-independent order, so raising
// off_threshold only appends candidates and never removes an Off decision.

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cellplan/ingest.hpp"
#include "cellplan/svc.hpp"

namespace cellplan {

struct FemtoRecord {
  std::string cell_id;
  double lat = 0.0;
  double lon = 0.0;
  int capacity = 1;
  std::set<std::string> neighbors;
};

/// Cells keyed by id. Construction checks capacity >= 1, that every
/// neighbour exists and that the neighbour relation is symmetric.
class FemtoDatabase {
 public:
  FemtoDatabase() = default;
  explicit FemtoDatabase(std::vector<FemtoRecord> records);

  const FemtoRecord& at(const std::string& cell_id) const;
  bool contains(const std::string& cell_id) const { return cells_.count(cell_id) != 0; }
  const std::map<std::string, FemtoRecord>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }

 private:
  std::map<std::string, FemtoRecord> cells_;
};

/// "cell_id,lat,lon,capacity,neighbor_ids" with ';'-separated neighbours.
FemtoDatabase read_femto_db(std::istream& in);
void write_femto_db(std::ostream& out, const FemtoDatabase& db);

struct QosConfig {
  double off_threshold = 0.2;
  double overload_threshold = 0.9;
  int horizon = kBinsPerDay;  // intervals 1..horizon are planned
  int min_off_run = 3;

  void validate() const;
};

enum class Action { On, Off };
std::string to_string(Action a);
Action parse_action(std::string_view text);

struct PlanAction {
  std::string cell_id;
  int interval = 1;  // 1..144
  Action action = Action::On;
  bool whitespace_flag = false;

  friend bool operator==(const PlanAction&, const PlanAction&) = default;
};

using CellLoads = std::map<std::string, std::vector<double>>;

struct Plan {
  /// Ordered by interval, then cell id.
  std::vector<PlanAction> actions;
  /// Advisory class per cell; does not influence the rule.
  std::map<std::string, ClassLabel> classes;
};

Plan plan(const CellLoads& predicted, const std::map<std::string, ClassLabel>& classes, const FemtoDatabase& db,
          const QosConfig& qos);

struct PlanEvaluation {
  double energy_saved = 0.0;  // fraction of planned cell-intervals Off
  std::size_t qos_violations = 0;
  std::size_t cell_intervals = 0;
};

/// Replays the plan against `actual`: Off loads move to the least-utilized
/// On neighbour (visited in activation-level order of `actual`), excess is
/// shed as in planning, and a cell-interval counts as a violation when its
/// assigned load exceeds capacity without a whitespace flag.
PlanEvaluation evaluate_plan(std::span<const PlanAction> actions, const CellLoads& actual, const FemtoDatabase& db,
                             const QosConfig& qos);

void write_plan(std::ostream& out, const Plan& p);
Plan read_plan(std::istream& in);

}  // namespace cellplan
