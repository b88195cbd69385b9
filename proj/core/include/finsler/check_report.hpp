#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace finsler {

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

/// residual <= tol: pass; residual <= 3 tol: inconclusive; otherwise fail.
Verdict classify(double residual, double tolerance);

/// Any fail wins, then any inconclusive, else pass. Empty input is inconclusive.
Verdict combine(const std::vector<Verdict>& verdicts);

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Structured outcome of a check: every measured residual next to the
/// tolerance it was judged against.
struct CheckReport {
  std::string check;
  nlohmann::json inputs = nlohmann::json::object();
  std::map<std::string, double> residuals;
  std::map<std::string, double> tolerances;
  std::map<std::string, double> values;  ///< measured quantities, not judged
  std::vector<std::string> warnings;
  std::optional<double> lhs;
  std::optional<double> rhs;
  Verdict verdict = Verdict::Inconclusive;

  /// Records a residual judged against `tolerance`.
  void add(const std::string& name, double residual, double tolerance);
  /// Verdict from all recorded residuals.
  void finalize();

  bool pass() const noexcept { return verdict == Verdict::Pass; }
  std::string digest() const { return fnv1a_hex(inputs.dump()); }
  /// The residual with the largest residual/tolerance ratio.
  std::pair<double, double> worst() const;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

}  // namespace finsler
