#include "nnlb/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nnlb {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return nlohmann::json(v).dump();
}

namespace {

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::string join_centers(const std::vector<int>& centers) {
  std::string out;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(centers[i]);
  }
  return out;
}

}  // namespace

std::string bound_curve_csv(const BoundCurve& curve) {
  std::ostringstream out;
  out << "n,l,W,w,value,regime,formula_id\n";
  for (const auto& p : curve.points) {
    out << format_double(p.n) << ',' << p.depth << ',' << p.width << ','
        << format_double(p.w) << ',' << format_double(p.value) << ','
        << curve.regime << ',' << curve.formula_id << '\n';
  }
  return out.str();
}

std::string tradeoff_csv(const std::vector<TradeoffRow>& rows) {
  std::ostringstream out;
  out << "n,l,W,w,value,regime,formula_id\n";
  for (const auto& r : rows) {
    out << r.n_exact << ',' << r.depth << ',' << r.width << ','
        << format_double(r.w) << ',' << format_double(r.value) << ','
        << (r.depth > 1 ? "deep" : "shallow") << ',' << r.formula_id << '\n';
  }
  return out.str();
}

std::string gap_csv(const GapReport& report) {
  std::ostringstream out;
  out << "n,l,W,w,value,regime,formula_id,nominal,ratio,slope,classification\n";
  for (const auto& p : report.points) {
    out << format_double(p.n) << ',' << p.depth << ',' << p.width << ','
        << format_double(p.w) << ',' << format_double(p.bound) << ','
        << (p.depth > 1 ? "deep" : "shallow") << ',' << p.formula_id << ','
        << format_double(p.nominal) << ',' << format_double(p.ratio) << ','
        << format_double(report.slope) << ",\"" << report.classification
        << "\"\n";
  }
  return out.str();
}

std::string entropy_curve_csv(const std::vector<CoveringResult>& curve) {
  std::ostringstream out;
  out << "n,radius,mode,centers\n";
  for (const auto& c : curve) {
    out << c.n << ',' << format_double(c.radius) << ','
        << cover_mode_name(c.mode) << ',' << join_centers(c.centers) << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const CoveringResult& cover) {
  return {{"n", cover.n},
          {"radius", json_number(cover.radius)},
          {"mode", cover_mode_name(cover.mode)},
          {"centers", cover.centers}};
}

nlohmann::json to_json(const std::vector<CoveringResult>& curve) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : curve) arr.push_back(to_json(c));
  return {{"curve", arr}};
}

nlohmann::json to_json(const BoundCurve& curve) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : curve.points)
    arr.push_back({{"n", json_number(p.n)},
                   {"l", p.depth},
                   {"W", p.width},
                   {"w", json_number(p.w)},
                   {"value", json_number(p.value)}});
  return {{"points", arr},
          {"regime", curve.regime},
          {"formula_id", curve.formula_id},
          {"constant_convention", curve.constant_convention}};
}

nlohmann::json to_json(const std::vector<TradeoffRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"l", r.depth},
                   {"W", r.width},
                   {"n", r.n_exact},
                   {"w", json_number(r.w)},
                   {"value", json_number(r.value)},
                   {"formula_id", r.formula_id}});
  return {{"rows", arr},
          {"constant_convention", "rate value, constants suppressed"}};
}

nlohmann::json to_json(const GapReport& report) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : report.points)
    arr.push_back({{"n", json_number(p.n)},
                   {"l", p.depth},
                   {"W", p.width},
                   {"w", json_number(p.w)},
                   {"value", json_number(p.bound)},
                   {"nominal", json_number(p.nominal)},
                   {"ratio", json_number(p.ratio)},
                   {"formula_id", p.formula_id}});
  return {{"points", arr},
          {"slope", json_number(report.slope)},
          {"intercept", json_number(report.intercept)},
          {"threshold", json_number(report.threshold)},
          {"classification", report.classification}};
}

nlohmann::json to_json(const EmpiricalLipschitz& emp) {
  nlohmann::json j = {{"max_ratio", json_number(emp.max_ratio)},
                      {"no_valid_pairs", emp.no_valid_pairs},
                      {"pairs_used", emp.pairs_used},
                      {"pairs_skipped", emp.pairs_skipped}};
  if (!emp.no_valid_pairs) {
    j["argmax_a"] = std::vector<double>(emp.argmax_a.begin(), emp.argmax_a.end());
    j["argmax_b"] = std::vector<double>(emp.argmax_b.begin(), emp.argmax_b.end());
  }
  return j;
}

nlohmann::json to_json(const VerifyResult& verify) {
  return {{"pass", verify.pass},
          {"certificate", json_number(verify.certificate)},
          {"margin", json_number(verify.margin)},
          {"empirical", to_json(verify.empirical)}};
}

nlohmann::json to_json(const SearchResult& result) {
  return {{"error", json_number(result.error)},
          {"evaluations", result.evaluations},
          {"params", std::vector<double>(result.params.values.begin(),
                                         result.params.values.end())},
          {"bound", json_number(result.params.bound)}};
}

nlohmann::json to_json(const ConsistencyReport& report) {
  return {{"per_target_error", report.per_target_error},
          {"empirical_max_error", json_number(report.empirical_max_error)},
          {"rate_value", json_number(report.rate_value)},
          {"ratio", json_number(report.ratio)},
          {"n", report.n},
          {"w", json_number(report.w)},
          {"sane", report.sane},
          {"warnings", report.warnings},
          {"note", "lower bound concerns the worst class element; a small "
                   "sample cannot certify it"}};
}

std::string resolve_out_path(const std::string& path) {
  if (path.empty()) return path;
  if (path.front() == '/') return path;
  const char* dir = std::getenv("NNLB_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return path;
  std::string base(dir);
  if (base.back() != '/') base += '/';
  return base + path;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  const std::string resolved = resolve_out_path(path);
  std::ofstream out(resolved);
  if (!out) throw std::invalid_argument("cannot write " + resolved);
  out << content;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    std::size_t used = 0;
    values.push_back(std::stod(cell, &used));
  }
  if (values.empty()) throw std::invalid_argument("empty number list");
  return values;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  for (double v : parse_number_list(text))
    values.push_back(static_cast<int>(std::lround(v)));
  return values;
}

}  // namespace nnlb
