#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nnlb/approx.hpp"
#include "nnlb/bounds.hpp"
#include "nnlb/entropy.hpp"
#include "nnlb/lipschitz.hpp"

namespace nnlb {

// Shortest-round-trip decimal rendering (bit-stable across runs);
// non-finite values print as inf/-inf/nan.
std::string format_double(double v);

// Comma-joined row writers with the shared curve/table header
// n,l,W,w,value,regime,formula_id (extended where a result carries more).
std::string bound_curve_csv(const BoundCurve& curve);
std::string tradeoff_csv(const std::vector<TradeoffRow>& rows);
std::string gap_csv(const GapReport& report);
std::string entropy_curve_csv(const std::vector<CoveringResult>& curve);

nlohmann::json to_json(const CoveringResult& cover);
nlohmann::json to_json(const std::vector<CoveringResult>& curve);
nlohmann::json to_json(const BoundCurve& curve);
nlohmann::json to_json(const std::vector<TradeoffRow>& rows);
nlohmann::json to_json(const GapReport& report);
nlohmann::json to_json(const EmpiricalLipschitz& emp);
nlohmann::json to_json(const VerifyResult& verify);
nlohmann::json to_json(const SearchResult& result);
nlohmann::json to_json(const ConsistencyReport& report);

// Relative paths are placed under $NNLB_OUT_DIR when that variable is set.
std::string resolve_out_path(const std::string& path);

// Writes to the resolved path, or to stdout when path is empty.
void write_output(const std::string& path, const std::string& content);

// Parses a comma-separated list of numbers ("2,4,8").
std::vector<double> parse_number_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace nnlb
