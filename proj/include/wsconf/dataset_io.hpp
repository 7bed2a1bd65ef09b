#pragma once

// File formats. Label, item and node ids are 1-based on disk and 0-based in
// memory.
//
// Records, one JSON object per line:
//   {"x": [floats], "weak": W, "y": Y}            "y" optional
// with W one of
//   {"type": "set", "labels": [ids], "k": K}
//   {"type": "interval", "lo": a, "hi": b}
//   {"type": "prefix", "items": [ids], "k": K}
//   {"type": "matching", "pairs": [[u, v], ...], "k": K}
// and Y, by the same variant: a class id, a real, a ranking (item ids by
// rank) or an assignment (right node of each left node).
//
// Prediction sets, one JSON object per line:
//   {"type": "set", "labels": [ids]}
//   {"type": "interval", "lo": a, "hi": b}
//   {"type": "rankings", "configs": [[ids], ...], "truncated": false}
//   {"type": "matchings", "configs": [[ids], ...], "truncated": false}
//
// Weak-label distributions: {"k": K, "atoms": [{"set": [ids], "p": p}, ...]}.
//
// Parse failures throw Error(kParse) naming the file and line.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsconf/conformal.hpp"
#include "wsconf/greedy.hpp"
#include "wsconf/matching.hpp"
#include "wsconf/weak_label.hpp"

namespace wsconf {

using Json = nlohmann::json;

Json weak_to_json(const WeakLabel& w);
WeakLabel weak_from_json(const Json& j);
Json strong_to_json(const StrongLabel& y);
/// The weak label selects how "y" is read.
StrongLabel strong_from_json(const Json& j, const WeakLabel& w);

Json record_to_json(const Record& r);
/// Validates the weak label and checks Y in W.
Record record_from_json(const Json& j, std::size_t id);

std::vector<Record> read_records(std::istream& in, const std::string& name = "<stream>");
std::vector<Record> read_records(const std::string& path);
void write_records(std::ostream& out, const std::vector<Record>& records);
void write_records(const std::string& path, const std::vector<Record>& records);

Json set_to_json(const PredictionSet& s);
PredictionSet set_from_json(const Json& j);
std::vector<PredictionSet> read_sets(const std::string& path);

/// One real per nonblank line.
std::vector<double> read_scores(std::istream& in, const std::string& name = "<stream>");
std::vector<double> read_scores(const std::string& path);

/// Cost matrices as CSV blocks (a line with K, then K rows of K values,
/// repeated) or JSON (one matrix, an array of matrices, or one matrix per
/// line).
std::vector<CostMatrix> read_cost_matrices(const std::string& path);

/// One comma-separated row of relevances per instance.
std::vector<std::vector<double>> read_relevance_csv(const std::string& path);

DiscreteWeakDistribution distribution_from_json(const Json& j);
Json distribution_to_json(const DiscreteWeakDistribution& d);

Json report_to_json(const CoverageReport& r);

std::string read_text(const std::string& path);

}  // namespace wsconf
