#include "wsconf/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "wsconf/error.hpp"

namespace wsconf {

namespace {

[[noreturn]] void parse_error(const std::string& what) { fail(ErrorCode::kParse, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) parse_error("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) parse_error(std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) parse_error(std::string(what) + ": expected a number");
  return j.get<double>();
}

int id_from(const Json& j, const char* what) {
  if (!j.is_number_integer()) parse_error(std::string(what) + ": expected an integer id");
  const auto v = j.get<std::int64_t>();
  if (v < 1 || v > std::numeric_limits<int>::max()) {
    parse_error(std::string(what) + ": ids are 1-based positive integers");
  }
  return static_cast<int>(v - 1);
}

std::vector<int> ids_from(const Json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string(what) + ": expected an array of ids");
  std::vector<int> out;
  out.reserve(j.size());
  for (const Json& e : j) out.push_back(id_from(e, what));
  return out;
}

int count_from(const Json& j, const char* what) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) {
    parse_error(std::string(what) + ": expected a positive integer");
  }
  return static_cast<int>(j.get<std::int64_t>());
}

Json ids_to(const std::vector<int>& ids) {
  Json a = Json::array();
  for (int v : ids) a.push_back(v + 1);
  return a;
}

std::string located(const std::string& name, std::size_t line, const std::string& what) {
  return name + ":" + std::to_string(line) + ": " + what;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return in;
}

std::vector<double> split_csv_numbers(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      parse_error("'" + cell + "' is not a number");
    }
    if (!blank(cell.substr(used))) parse_error("'" + cell + "' is not a number");
    if (!std::isfinite(v)) parse_error("non-finite value");
    out.push_back(v);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Json weak_to_json(const WeakLabel& w) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ExplicitSet>) {
          return {{"type", "set"}, {"labels", ids_to(v.labels)}, {"k", v.k}};
        } else if constexpr (std::is_same_v<T, Interval>) {
          return {{"type", "interval"}, {"lo", v.lo}, {"hi", v.hi}};
        } else if constexpr (std::is_same_v<T, RankingPrefix>) {
          return {{"type", "prefix"}, {"items", ids_to(v.prefix)}, {"k", v.total_items}};
        } else {
          Json pairs = Json::array();
          for (auto [a, b] : v.pairs) pairs.push_back({a + 1, b + 1});
          return {{"type", "matching"}, {"pairs", pairs}, {"k", v.k}};
        }
      },
      w);
}

WeakLabel weak_from_json(const Json& j) {
  const Json& type = field(j, "type");
  if (!type.is_string()) parse_error("weak label 'type' must be a string");
  const std::string t = type.get<std::string>();
  WeakLabel w;
  if (t == "set") {
    w = ExplicitSet{ids_from(field(j, "labels"), "labels"), count_from(field(j, "k"), "k")};
  } else if (t == "interval") {
    w = Interval{number(field(j, "lo"), "lo"), number(field(j, "hi"), "hi")};
  } else if (t == "prefix") {
    w = RankingPrefix{ids_from(field(j, "items"), "items"), count_from(field(j, "k"), "k")};
  } else if (t == "matching") {
    PartialMatching m;
    const Json& pairs = field(j, "pairs");
    if (!pairs.is_array()) parse_error("pairs: expected an array");
    for (const Json& p : pairs) {
      if (!p.is_array() || p.size() != 2) parse_error("pairs: each pair must be [u, v]");
      m.pairs.emplace_back(id_from(p[0], "pairs"), id_from(p[1], "pairs"));
    }
    m.k = count_from(field(j, "k"), "k");
    w = std::move(m);
  } else {
    parse_error("unknown weak label type '" + t + "'");
  }
  validate(w);
  return w;
}

Json strong_to_json(const StrongLabel& y) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Label>) return v + 1;
        else if constexpr (std::is_same_v<T, double>) return v;
        else if constexpr (std::is_same_v<T, Ranking>) return ids_to(v.perm);
        else return ids_to(v.map);
      },
      y);
}

StrongLabel strong_from_json(const Json& j, const WeakLabel& w) {
  if (std::holds_alternative<ExplicitSet>(w)) return id_from(j, "y");
  if (std::holds_alternative<Interval>(w)) return number(j, "y");
  if (std::holds_alternative<RankingPrefix>(w)) {
    Ranking r{ids_from(j, "y")};
    validate(r);
    return r;
  }
  Assignment a{ids_from(j, "y")};
  validate(a);
  return a;
}

Json record_to_json(const Record& r) {
  Json j;
  j["x"] = r.x;
  j["weak"] = weak_to_json(r.weak);
  if (r.y) j["y"] = strong_to_json(*r.y);
  return j;
}

Record record_from_json(const Json& j, std::size_t id) {
  Record r;
  r.id = id;
  const Json& x = field(j, "x");
  if (!x.is_array()) parse_error("x: expected an array of numbers");
  for (const Json& e : x) r.x.push_back(number(e, "x"));
  r.weak = weak_from_json(field(j, "weak"));
  if (auto it = j.find("y"); it != j.end() && !it->is_null()) r.y = strong_from_json(*it, r.weak);
  check_consistent(r);
  return r;
}

std::vector<Record> read_records(std::istream& in, const std::string& name) {
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      out.push_back(record_from_json(Json::parse(line), out.size()));
    } catch (const Json::exception& e) {
      fail(ErrorCode::kParse, located(name, lineno, e.what()));
    } catch (const Error& e) {
      const ErrorCode code = e.code() == ErrorCode::kInconsistentData ? e.code() : ErrorCode::kParse;
      fail(code, located(name, lineno, e.what()));
    }
  }
  return out;
}

std::vector<Record> read_records(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_records(in, path);
}

void write_records(std::ostream& out, const std::vector<Record>& records) {
  for (const Record& r : records) out << record_to_json(r).dump() << '\n';
}

void write_records(const std::string& path, const std::vector<Record>& records) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_records(out, records);
  if (!out) fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------

Json set_to_json(const PredictionSet& s) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LabelSet>) {
          return {{"type", "set"}, {"labels", ids_to(v.labels)}};
        } else if constexpr (std::is_same_v<T, Interval>) {
          return {{"type", "interval"}, {"lo", v.lo}, {"hi", v.hi}};
        } else if constexpr (std::is_same_v<T, RankingSet>) {
          Json configs = Json::array();
          for (const auto& c : v.configs) configs.push_back(ids_to(c.perm));
          return {{"type", "rankings"}, {"configs", configs}, {"truncated", v.truncated}};
        } else {
          Json configs = Json::array();
          for (const auto& c : v.configs) configs.push_back(ids_to(c.map));
          return {{"type", "matchings"}, {"configs", configs}, {"truncated", v.truncated}};
        }
      },
      s);
}

PredictionSet set_from_json(const Json& j) {
  const Json& type = field(j, "type");
  if (!type.is_string()) parse_error("set 'type' must be a string");
  const std::string t = type.get<std::string>();
  auto truncated = [&] {
    auto it = j.find("truncated");
    return it != j.end() && it->is_boolean() && it->get<bool>();
  };
  if (t == "set") {
    LabelSet s{ids_from(field(j, "labels"), "labels")};
    std::sort(s.labels.begin(), s.labels.end());
    return s;
  }
  if (t == "interval") {
    auto bound = [&](const char* key) {
      const Json& v = field(j, key);
      if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "inf") return std::numeric_limits<double>::infinity();
      }
      return number(v, key);
    };
    Interval iv{bound("lo"), bound("hi")};
    if (iv.lo > iv.hi) parse_error("interval: lo exceeds hi");
    return iv;
  }
  if (t == "rankings" || t == "matchings") {
    const Json& configs = field(j, "configs");
    if (!configs.is_array()) parse_error("configs: expected an array");
    if (t == "rankings") {
      RankingSet s;
      for (const Json& c : configs) {
        Ranking r{ids_from(c, "configs")};
        validate(r);
        s.configs.push_back(std::move(r));
      }
      s.truncated = truncated();
      return s;
    }
    AssignmentSet s;
    for (const Json& c : configs) {
      Assignment a{ids_from(c, "configs")};
      validate(a);
      s.configs.push_back(std::move(a));
    }
    s.truncated = truncated();
    return s;
  }
  parse_error("unknown set type '" + t + "'");
}

std::vector<PredictionSet> read_sets(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<PredictionSet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      out.push_back(set_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      fail(ErrorCode::kParse, located(path, lineno, e.what()));
    } catch (const Error& e) {
      fail(ErrorCode::kParse, located(path, lineno, e.what()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> read_scores(std::istream& in, const std::string& name) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      const auto values = split_csv_numbers(line);
      if (values.size() != 1) parse_error("expected one score per line");
      out.push_back(values.front());
    } catch (const Error& e) {
      fail(ErrorCode::kParse, located(name, lineno, e.what()));
    }
  }
  return out;
}

std::vector<double> read_scores(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_scores(in, path);
}

std::string read_text(const std::string& path) {
  std::ifstream in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

CostMatrix matrix_from_json(const Json& j) {
  if (!j.is_array()) parse_error("cost matrix: expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (const Json& row : j) {
    if (!row.is_array()) parse_error("cost matrix: each row must be an array");
    std::vector<double> r;
    for (const Json& e : row) r.push_back(number(e, "cost"));
    rows.push_back(std::move(r));
  }
  return CostMatrix::from_rows(rows);
}

bool is_matrix(const Json& j) {
  return j.is_array() && !j.empty() && j.front().is_array() &&
         (j.front().empty() || j.front().front().is_number());
}

}  // namespace

std::vector<CostMatrix> read_cost_matrices(const std::string& path) {
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) parse_error(path + ": empty cost file");
  std::vector<CostMatrix> out;

  if (text[first] == '[') {
    try {
      const Json j = Json::parse(text);
      if (is_matrix(j)) {
        out.push_back(matrix_from_json(j));
      } else {
        for (const Json& m : j) out.push_back(matrix_from_json(m));
      }
      return out;
    } catch (const Json::exception&) {
      // Not a single document: one matrix per line.
    } catch (const Error& e) {
      fail(ErrorCode::kParse, path + ": " + e.what());
    }
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
      ++lineno;
      if (blank(line)) continue;
      try {
        out.push_back(matrix_from_json(Json::parse(line)));
      } catch (const Json::exception& e) {
        fail(ErrorCode::kParse, located(path, lineno, e.what()));
      } catch (const Error& e) {
        fail(ErrorCode::kParse, located(path, lineno, e.what()));
      }
    }
    return out;
  }

  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  int expect = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(ss, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      const auto values = split_csv_numbers(line);
      if (expect == 0) {
        if (values.size() != 1 || values[0] < 1 || values[0] != std::floor(values[0])) {
          parse_error("expected a header line holding K");
        }
        expect = static_cast<int>(values[0]);
        rows.clear();
        continue;
      }
      if (static_cast<int>(values.size()) != expect) {
        parse_error("expected " + std::to_string(expect) + " values, got " +
                    std::to_string(values.size()));
      }
      rows.push_back(values);
      if (static_cast<int>(rows.size()) == expect) {
        out.push_back(CostMatrix::from_rows(rows));
        expect = 0;
      }
    } catch (const Error& e) {
      fail(ErrorCode::kParse, located(path, lineno, e.what()));
    }
  }
  if (expect != 0) fail(ErrorCode::kParse, located(path, lineno, "truncated cost matrix"));
  return out;
}

std::vector<std::vector<double>> read_relevance_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      out.push_back(split_csv_numbers(line));
    } catch (const Error& e) {
      fail(ErrorCode::kParse, located(path, lineno, e.what()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

DiscreteWeakDistribution distribution_from_json(const Json& j) {
  const int k = count_from(field(j, "k"), "k");
  const Json& atoms = field(j, "atoms");
  if (!atoms.is_array()) parse_error("atoms: expected an array");
  std::vector<Atom> out;
  for (const Json& a : atoms) {
    const std::vector<int> ids = ids_from(field(a, "set"), "set");
    for (int y : ids) {
      if (y >= k) parse_error("set: label " + std::to_string(y + 1) + " exceeds k");
    }
    out.push_back({mask_of(ids), number(field(a, "p"), "p")});
  }
  return DiscreteWeakDistribution(k, std::move(out));
}

Json distribution_to_json(const DiscreteWeakDistribution& d) {
  Json atoms = Json::array();
  for (const Atom& a : d.atoms()) atoms.push_back({{"set", ids_to(labels_of(a.set))}, {"p", a.p}});
  return {{"k", d.k()}, {"atoms", atoms}};
}

Json report_to_json(const CoverageReport& r) {
  Json hist = Json::object();
  for (auto [size, count] : r.size_histogram) hist[std::to_string(size)] = count;
  return {{"strong_coverage", r.strong_coverage},
          {"weak_coverage", r.weak_coverage},
          {"avg_size", r.avg_size},
          {"size_histogram", hist},
          {"n_test", r.n_test},
          {"truncated_fraction", r.truncated_fraction}};
}

}  // namespace wsconf
