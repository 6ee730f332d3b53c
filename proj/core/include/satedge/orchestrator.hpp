#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "satedge/admm.hpp"
#include "satedge/baselines.hpp"

namespace satedge {

enum class Method { AdmmHybrid, AdmmClassical, AdmmExhaustive, Exhaustive, EqualBandwidth };

std::optional<Method> parse_method(std::string_view name);
std::string to_string(Method m);
const std::vector<Method>& all_methods();

/// One solved instance, whatever produced it.
struct Solution {
  Method method = Method::AdmmExhaustive;
  Assignment x;
  BandwidthPlan plan;
  double energy = 0.0;  // J, at B
  ConstraintResiduals residuals;
  bool converged = true;
  std::vector<IterateRow> log;  // ADMM methods only
  double final_dual = 0.0;
  std::uint64_t evaluations = 0;
  double seconds = 0.0;
};

/// Runs one method. Infeasibility comes back typed; solver failures throw.
Outcome<Solution> solve(const Scenario& s, Method m, const AdmmSettings& settings, std::uint64_t seed);

/// Canonical JSON of every setting that changes results.
std::string settings_json(const AdmmSettings& settings);
std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits of fnv1a64(settings_json(settings)).
std::string settings_hash(const AdmmSettings& settings);

/// Lines written as "# key: value" above the CSV header.
struct CsvMeta {
  std::vector<std::pair<std::string, std::string>> entries;
  static CsvMeta make(std::string_view kind, const AdmmSettings& settings, std::uint64_t seed);
  void add(std::string key, std::string value) { entries.emplace_back(std::move(key), std::move(value)); }
};

using CsvRow = std::vector<std::string>;
void write_csv(const std::filesystem::path& path, const CsvMeta& meta, const CsvRow& header,
               const std::vector<CsvRow>& rows);

/// Round-trip formatting for CSV cells and documents.
std::string format_double(double v);

std::string result_document(const Scenario& s, const Solution& sol, const AdmmSettings& settings, std::uint64_t seed);
std::string infeasible_document(const Scenario& s, Method m, const Infeasibility& why, const AdmmSettings& settings,
                                std::uint64_t seed);
void write_iterate_csv(const std::filesystem::path& path, const std::vector<IterateRow>& log, const CsvMeta& meta);
void write_timing(const std::filesystem::path& path, const std::vector<std::pair<std::string, double>>& seconds);
void write_text(const std::filesystem::path& path, const std::string& text);

// Parameter sweeps.

enum class SweepAxis { TaskBits, BAccessTotal, BSTotal };
std::optional<SweepAxis> parse_axis(std::string_view name);
std::string to_string(SweepAxis a);
/// The base scenario with one parameter replaced (task bits broadcast to
/// every UE). Throws ConfigError when the result does not validate.
Scenario with_axis(const Scenario& base, SweepAxis axis, double value);

struct SweepRow {
  double value = 0.0;
  Method method = Method::AdmmExhaustive;
  bool feasible = false;
  double energy = 0.0;  // NaN when infeasible
  std::string assignment;
  std::string status;  // "ok", "infeasible:<constraint>"
  double seconds = 0.0;
};

/// Rows follow the order of `values`, then of `methods`. Points run on up
/// to `threads` workers; each solve is single-threaded so the rows do not
/// depend on the worker count.
std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis, const std::vector<double>& values,
                            const std::vector<Method>& methods, const AdmmSettings& settings, std::uint64_t seed,
                            int threads);
void write_sweep_csv(const std::filesystem::path& path, SweepAxis axis, const std::vector<SweepRow>& rows,
                     const CsvMeta& meta);

// Agent training on the first discrete subproblem.

/// Evaluator the training runs against: look-ahead scoring from the
/// starting plan, zero multipliers.
CandidateEvaluator training_evaluator(const Scenario& s, const AdmmSettings& settings);
/// Best reward any assignment can reach on `eval` (enumeration).
double best_reward(CandidateEvaluator& eval, const DualState& d);

struct TrainingRun {
  TrainResult result;
  double best_possible = 0.0;  // exhaustive best reward
  double seconds = 0.0;
};

TrainingRun train_agent(const Scenario& s, AgentKind kind, int episodes, const AdmmSettings& settings,
                        std::uint64_t seed, const std::filesystem::path& checkpoint = {});
void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& curve, const CsvMeta& meta);

// Duality gap per ADMM iteration.

struct GapRow {
  int iter = 0;
  double primal = 0.0;  // energy at B
  double dual = 0.0;    // best dual value of the x-update
  double relative = 0.0;
};

struct GapReport {
  std::vector<GapRow> rows;
  double final_primal = 0.0;
  double final_dual = 0.0;
  double final_relative = 0.0;
  Solution solution;
};

Outcome<GapReport> duality_gap_run(const Scenario& s, Method m, const AdmmSettings& settings, std::uint64_t seed);
void write_gap_csv(const std::filesystem::path& path, const GapReport& report, const CsvMeta& meta);

/// File names used under an output directory.
namespace files {
std::string result(Method m);
std::string iterates(Method m);
std::string curve(AgentKind k, double b_access_hz, double b_s_hz);
std::string checkpoint(AgentKind k, double b_access_hz, double b_s_hz);
std::string sweep(SweepAxis a);
inline constexpr const char* kDualityGap = "duality_gap.csv";
std::string timing(const std::string& output_name);
}  // namespace files

}  // namespace satedge
