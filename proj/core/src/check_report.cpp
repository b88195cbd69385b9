#include "finsler/check_report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace finsler {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      break;
  }
  return "inconclusive";
}

Verdict classify(double residual, double tolerance) {
  if (!std::isfinite(residual)) return Verdict::Fail;
  if (residual <= tolerance) return Verdict::Pass;
  if (residual <= 3.0 * tolerance) return Verdict::Inconclusive;
  return Verdict::Fail;
}

Verdict combine(const std::vector<Verdict>& verdicts) {
  if (verdicts.empty()) return Verdict::Inconclusive;
  bool marginal = false;
  for (Verdict v : verdicts) {
    if (v == Verdict::Fail) return Verdict::Fail;
    if (v == Verdict::Inconclusive) marginal = true;
  }
  return marginal ? Verdict::Inconclusive : Verdict::Pass;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void CheckReport::add(const std::string& name, double residual, double tolerance) {
  residuals[name] = residual;
  tolerances[name] = tolerance;
}

void CheckReport::finalize() {
  std::vector<Verdict> vs;
  for (const auto& [name, r] : residuals) vs.push_back(classify(r, tolerances.at(name)));
  verdict = combine(vs);
}

std::pair<double, double> CheckReport::worst() const {
  double best_ratio = -1.0;
  std::pair<double, double> out{0.0, 0.0};
  for (const auto& [name, r] : residuals) {
    const double t = tolerances.at(name);
    const double ratio = std::isfinite(r) ? r / t : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      out = {r, t};
    }
  }
  return out;
}

namespace {

nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

nlohmann::json CheckReport::to_json() const {
  nlohmann::json j;
  j["check"] = check;
  j["inputs"] = digest();
  j["input_description"] = inputs;
  j["residuals"] = nlohmann::json::object();
  for (const auto& [k, v] : residuals) j["residuals"][k] = number(v);
  j["tolerances"] = nlohmann::json::object();
  for (const auto& [k, v] : tolerances) j["tolerances"][k] = number(v);
  j["values"] = nlohmann::json::object();
  for (const auto& [k, v] : values) j["values"][k] = number(v);
  j["warnings"] = warnings;
  j["verdict"] = to_string(verdict);
  const auto [r, t] = worst();
  j["residual"] = number(r);
  j["tolerance"] = number(t);
  j["lhs"] = lhs ? number(*lhs) : nlohmann::json(nullptr);
  j["rhs"] = rhs ? number(*rhs) : nlohmann::json(nullptr);
  j["pass"] = pass();
  return j;
}

std::string CheckReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "kind,name,value,tolerance\n";
  os << "check," << check << ",,\n";
  os << "inputs," << digest() << ",,\n";
  for (const auto& [k, v] : residuals) os << "residual," << k << "," << v << "," << tolerances.at(k) << "\n";
  for (const auto& [k, v] : values) os << "value," << k << "," << v << ",\n";
  if (lhs) os << "value,lhs," << *lhs << ",\n";
  if (rhs) os << "value,rhs," << *rhs << ",\n";
  os << "verdict," << to_string(verdict) << ",,\n";
  return os.str();
}

}  // namespace finsler
