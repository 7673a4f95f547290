#pragma once

// Batch experiments: a strict JSON experiment description, a runner that
// evaluates every task at every truncation, and canonical report output.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "semiframe/semiframe.hpp"

namespace semiframe::experiment {

using nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr double kDefaultTol = 1e-9;
inline constexpr std::size_t kDefaultProbes = 20;

// ---------------------------------------------------------------------------
// Spec model
// ---------------------------------------------------------------------------

struct MeasureSpec {
  enum class Kind { Counting, Weights, Partition };
  Kind kind = Kind::Counting;
  std::optional<Expression> weight_rule;  // mu_n, n 1-based
  std::vector<double> weight_values;
  std::optional<Expression> block_size;   // |X_k|, k 1-based
};

struct FamilySpec {
  std::string name;
  std::string constructor;
  std::optional<Expression> rule;  // diagonal entries, weighted m_n or rkhs m(x)
  std::string side = "psi";
  std::string op;  // metric: S, partition_G: G
  double oversampling = 1.5;
  double lo = -1.0, hi = 1.0;
  double bandwidth = 0.5;
  int power = 1;
  std::vector<CVector> vectors;
  std::optional<MeasureSpec> measure;
};

struct OperatorDef {
  std::string name;
  std::string kind;
  std::optional<Expression> rule;
  ComplexMatrix rows;
  Complex value{1.0, 0.0};
  std::string ref;  // metric: S, frame_operator: family
};

struct TaskSpec {
  std::string task;
  std::string family;
  std::string dual;
  std::string op;
  std::string a_operator;
  std::optional<Expression> rhs;
  std::optional<double> tol;
  std::size_t probes = kDefaultProbes;
};

struct ExperimentSpec {
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> schedule;
  MeasureSpec measure;
  std::vector<FamilySpec> families;
  std::vector<OperatorDef> operators;
  std::vector<TaskSpec> tasks;

  const FamilySpec* family(std::string_view name) const {
    for (const auto& f : families)
      if (f.name == name) return &f;
    return nullptr;
  }
  const OperatorDef* op(std::string_view name) const {
    for (const auto& o : operators)
      if (o.name == name) return &o;
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[noreturn]] inline void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ValidationError, path + ": " + what);
}

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) invalid(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      invalid(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

inline std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline const json& require(const json& obj, std::string_view key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) invalid(join(path, key), "missing required key");
  return *it;
}

inline std::string get_string(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) invalid(join(path, key), "expected a string");
  return v.get<std::string>();
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) invalid(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) invalid(path, "expected a finite number");
  return x;
}

inline double get_number(const json& obj, std::string_view key, const std::string& path, double fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, join(path, key));
}

inline std::uint64_t as_unsigned(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    invalid(path, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline Expression get_rule(const json& obj, std::string_view key, const std::string& path, std::string_view vars) {
  const std::string text = get_string(obj, key, path);
  try {
    return Expression::parse(text, vars);
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, join(path, key) + ": " + e.message(), {}, e.index());
  }
}

inline Complex as_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {as_number(v, path), 0.0};
  if (v.is_array() && v.size() == 2) return {as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]")};
  invalid(path, "expected a number or [re, im]");
}

inline CVector as_complex_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) invalid(path, "expected a non-empty array");
  CVector out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_complex(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline MeasureSpec parse_measure(const json& m, const std::string& path) {
  MeasureSpec out;
  const std::string kind = get_string(m, "kind", path);
  if (kind == "counting") {
    check_keys(m, path, {"kind"});
  } else if (kind == "weights") {
    check_keys(m, path, {"kind", "rule", "values"});
    out.kind = MeasureSpec::Kind::Weights;
    const bool has_rule = m.contains("rule"), has_values = m.contains("values");
    if (has_rule == has_values) invalid(path, "give exactly one of 'rule' and 'values'");
    if (has_rule) {
      out.weight_rule = get_rule(m, "rule", path, "n");
    } else {
      const json& v = m["values"];
      if (!v.is_array() || v.empty()) invalid(path + ".values", "expected a non-empty array");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double w = as_number(v[i], path + ".values[" + std::to_string(i) + "]");
        if (!(w > 0.0)) invalid(path + ".values[" + std::to_string(i) + "]", "weights must be positive");
        out.weight_values.push_back(w);
      }
    }
  } else if (kind == "partition") {
    check_keys(m, path, {"kind", "block_size", "weight"});
    out.kind = MeasureSpec::Kind::Partition;
    out.block_size = get_rule(m, "block_size", path, "n");
    if (m.contains("weight")) out.weight_rule = get_rule(m, "weight", path, "n");
  } else {
    invalid(path + ".kind", "unknown measure kind '" + kind + "'");
  }
  return out;
}

inline FamilySpec parse_family(const json& f, const std::string& path) {
  FamilySpec out;
  out.name = get_string(f, "name", path);
  out.constructor = get_string(f, "constructor", path);
  const std::string& c = out.constructor;
  auto side = [&] {
    if (f.contains("side")) {
      out.side = get_string(f, "side", path);
      if (out.side != "psi" && out.side != "phi") invalid(path + ".side", "expected 'psi' or 'phi'");
    }
  };
  if (c == "onb") {
    check_keys(f, path, {"name", "constructor", "measure"});
  } else if (c == "diagonal") {
    check_keys(f, path, {"name", "constructor", "rule", "measure"});
    out.rule = get_rule(f, "rule", path, "n");
  } else if (c == "weighted_onb") {
    check_keys(f, path, {"name", "constructor", "m", "side", "measure"});
    out.rule = get_rule(f, "m", path, "n");
    side();
  } else if (c == "metric") {
    check_keys(f, path, {"name", "constructor", "S", "measure"});
    out.op = get_string(f, "S", path);
  } else if (c == "random_frame") {
    check_keys(f, path, {"name", "constructor", "oversampling", "measure"});
    out.oversampling = get_number(f, "oversampling", path, 1.5);
    if (!(out.oversampling >= 1.0) || out.oversampling > 64.0) {
      invalid(path + ".oversampling", "expected a value in [1, 64]");
    }
  } else if (c == "rkhs") {
    check_keys(f, path, {"name", "constructor", "interval", "bandwidth", "weight", "power", "side", "measure"});
    if (f.contains("interval")) {
      const json& iv = f["interval"];
      if (!iv.is_array() || iv.size() != 2) invalid(path + ".interval", "expected [lo, hi]");
      out.lo = as_number(iv[0], path + ".interval[0]");
      out.hi = as_number(iv[1], path + ".interval[1]");
      if (!(out.lo < out.hi)) invalid(path + ".interval", "expected lo < hi");
    }
    out.bandwidth = get_number(f, "bandwidth", path, 0.5);
    if (!(out.bandwidth > 0.0)) invalid(path + ".bandwidth", "expected a positive number");
    out.rule = f.contains("weight") ? get_rule(f, "weight", path, "x") : Expression::parse("1");
    if (f.contains("power")) out.power = static_cast<int>(as_unsigned(f["power"], path + ".power"));
    side();
  } else if (c == "partition_G") {
    check_keys(f, path, {"name", "constructor", "G", "side", "measure"});
    out.op = get_string(f, "G", path);
    side();
  } else if (c == "explicit") {
    check_keys(f, path, {"name", "constructor", "vectors", "measure"});
    const json& v = require(f, "vectors", path);
    if (!v.is_array() || v.empty()) invalid(path + ".vectors", "expected a non-empty array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.vectors.push_back(as_complex_vector(v[i], path + ".vectors[" + std::to_string(i) + "]"));
      if (out.vectors.back().size() != out.vectors.front().size()) {
        invalid(path + ".vectors[" + std::to_string(i) + "]", "all vectors must have the same length");
      }
    }
  } else {
    invalid(path + ".constructor", "unknown constructor '" + c + "'");
  }
  if (f.contains("measure")) out.measure = parse_measure(f["measure"], path + ".measure");
  return out;
}

inline OperatorDef parse_operator(const json& o, const std::string& path) {
  OperatorDef out;
  out.name = get_string(o, "name", path);
  out.kind = get_string(o, "kind", path);
  const std::string& k = out.kind;
  if (k == "diagonal") {
    check_keys(o, path, {"name", "kind", "rule"});
    out.rule = get_rule(o, "rule", path, "n");
  } else if (k == "dense") {
    check_keys(o, path, {"name", "kind", "rows"});
    const json& r = require(o, "rows", path);
    if (!r.is_array() || r.empty()) invalid(path + ".rows", "expected a non-empty array");
    std::vector<CVector> rows;
    for (std::size_t i = 0; i < r.size(); ++i) {
      rows.push_back(as_complex_vector(r[i], path + ".rows[" + std::to_string(i) + "]"));
      if (rows.back().size() != r.size()) invalid(path + ".rows[" + std::to_string(i) + "]", "matrix must be square");
    }
    out.rows = ComplexMatrix::from_rows(rows);
  } else if (k == "identity" || k == "zero") {
    check_keys(o, path, {"name", "kind"});
  } else if (k == "scaled_identity") {
    check_keys(o, path, {"name", "kind", "value"});
    out.value = as_complex(require(o, "value", path), path + ".value");
  } else if (k == "metric") {
    check_keys(o, path, {"name", "kind", "S"});
    out.ref = get_string(o, "S", path);
  } else if (k == "frame_operator") {
    check_keys(o, path, {"name", "kind", "family"});
    out.ref = get_string(o, "family", path);
  } else {
    invalid(path + ".kind", "unknown operator kind '" + k + "'");
  }
  return out;
}

struct TaskShape {
  std::string_view name;
  bool dual = false;
  bool op = false;
  bool a_operator = false;
  bool rhs = false;
  bool probes = false;
  bool kernel_geometry = false;  // accepts families with a Gram inner product
  bool consistent = false;       // needs a truncation-consistent family
};

inline const std::vector<TaskShape>& task_shapes() {
  static const std::vector<TaskShape> shapes = {
      {"classify", false, false, false, false, false, false, true},
      {"bessel_bound", false, false, false, false, false, true},
      {"lower_frame_bound", false, false, false, false, false, true},
      {"mu_total", false, false, false, false, false, true},
      {"weak_A_frame", false, true},
      {"weak_upper", false, true},
      {"controlled_frame", false, true},
      {"alt_upper", false, true},
      {"canonical_dual", false, false, false, false, true},
      {"dual_pair", true, false, false, false, false, true},
      {"weak_G_dual", true, true, false, false, false, true},
      {"lower_atomic_loop", false, true, false, false, true},
      {"upper_factorize", false, true},
      {"aphi_chain", true, true, true},
      {"coercivity", false, true},
      {"weak_expansion", false, true, false, true, true},
  };
  return shapes;
}

inline const TaskShape* task_shape(std::string_view name) {
  for (const auto& s : task_shapes())
    if (s.name == name) return &s;
  return nullptr;
}

inline TaskSpec parse_task(const json& t, const std::string& path) {
  check_keys(t, path, {"task", "family", "dual", "operator", "a_operator", "rhs", "tol", "probes"});
  TaskSpec out;
  out.task = get_string(t, "task", path);
  const TaskShape* shape = task_shape(out.task);
  if (!shape) invalid(path + ".task", "unknown task '" + out.task + "'");
  out.family = get_string(t, "family", path);
  auto field = [&](std::string_view key, bool wanted, std::string& dst) {
    if (wanted) {
      dst = get_string(t, key, path);
    } else if (t.contains(key)) {
      invalid(join(path, key), "not used by task '" + out.task + "'");
    }
  };
  field("dual", shape->dual, out.dual);
  field("operator", shape->op, out.op);
  field("a_operator", shape->a_operator, out.a_operator);
  if (shape->rhs) {
    out.rhs = get_rule(t, "rhs", path, "n");
  } else if (t.contains("rhs")) {
    invalid(path + ".rhs", "not used by task '" + out.task + "'");
  }
  if (t.contains("tol")) {
    const double tol = as_number(t["tol"], path + ".tol");
    if (!(tol > 0.0)) invalid(path + ".tol", "expected a positive number");
    out.tol = tol;
  }
  if (t.contains("probes")) {
    if (!shape->probes) invalid(path + ".probes", "not used by task '" + out.task + "'");
    out.probes = as_unsigned(t["probes"], path + ".probes");
    if (out.probes == 0 || out.probes > 10000) invalid(path + ".probes", "expected a value in [1, 10000]");
  }
  return out;
}

inline bool uses_random_probes(const ExperimentSpec& spec) {
  for (const auto& f : spec.families)
    if (f.constructor == "random_frame") return true;
  for (const auto& t : spec.tasks)
    if (task_shape(t.task)->probes) return true;
  return false;
}

inline void check_references(const ExperimentSpec& spec) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < spec.families.size(); ++i) {
    if (!names.insert(spec.families[i].name).second) {
      invalid("families[" + std::to_string(i) + "].name", "duplicate name '" + spec.families[i].name + "'");
    }
  }
  for (std::size_t i = 0; i < spec.operators.size(); ++i) {
    if (!names.insert(spec.operators[i].name).second) {
      invalid("operators[" + std::to_string(i) + "].name", "duplicate name '" + spec.operators[i].name + "'");
    }
  }
  for (std::size_t i = 0; i < spec.families.size(); ++i) {
    const auto& f = spec.families[i];
    const std::string path = "families[" + std::to_string(i) + "]";
    if (!f.op.empty() && !spec.op(f.op)) {
      invalid(path + (f.constructor == "metric" ? ".S" : ".G"), "undefined operator '" + f.op + "'");
    }
    if (f.constructor == "partition_G") {
      const MeasureSpec& m = f.measure ? *f.measure : spec.measure;
      if (m.kind != MeasureSpec::Kind::Partition) invalid(path, "partition_G needs a partition measure");
    }
  }
  for (std::size_t i = 0; i < spec.operators.size(); ++i) {
    const auto& o = spec.operators[i];
    const std::string path = "operators[" + std::to_string(i) + "]";
    if (o.kind == "metric") {
      if (!spec.op(o.ref)) invalid(path + ".S", "undefined operator '" + o.ref + "'");
      // follow the chain of metric references to reject cycles
      const OperatorDef* cur = &o;
      for (std::size_t steps = 0; cur && cur->kind == "metric"; ++steps) {
        if (steps > spec.operators.size()) invalid(path + ".S", "cyclic operator reference");
        cur = spec.op(cur->ref);
      }
    }
    if (o.kind == "frame_operator" && !spec.family(o.ref)) {
      invalid(path + ".family", "undefined family '" + o.ref + "'");
    }
  }
  for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
    const auto& t = spec.tasks[i];
    const TaskShape& shape = *task_shape(t.task);
    const std::string path = "tasks[" + std::to_string(i) + "]";
    const FamilySpec* fam = spec.family(t.family);
    if (!fam) invalid(path + ".family", "undefined family '" + t.family + "'");
    const bool kernel = fam->constructor == "rkhs";
    if (kernel && !shape.kernel_geometry) {
      invalid(path + ".family", "task '" + t.task + "' does not support kernel-space families");
    }
    if (kernel && shape.consistent) {
      invalid(path + ".family", "task '" + t.task + "' needs a truncation-consistent family; kernel grids change with d");
    }
    if (shape.dual) {
      const FamilySpec* dual = spec.family(t.dual);
      if (!dual) invalid(path + ".dual", "undefined family '" + t.dual + "'");
      if ((dual->constructor == "rkhs") != kernel) invalid(path + ".dual", "families live in different geometries");
    }
    if (shape.op && !spec.op(t.op)) invalid(path + ".operator", "undefined operator '" + t.op + "'");
    if (shape.a_operator && !spec.op(t.a_operator)) {
      invalid(path + ".a_operator", "undefined operator '" + t.a_operator + "'");
    }
  }
}

}  // namespace detail

/// Parses and validates an experiment description. `seed_override`
/// replaces (or supplies) the seed.
inline ExperimentSpec parse_spec(std::string_view text, std::optional<std::uint64_t> seed_override = std::nullopt) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  using namespace detail;
  check_keys(doc, "", {"seed", "schedule", "measure", "families", "operators", "tasks"});
  ExperimentSpec spec;
  if (doc.contains("seed")) spec.seed = as_unsigned(doc["seed"], "seed");
  if (seed_override) spec.seed = seed_override;

  const json& sched = require(doc, "schedule", "");
  if (!sched.is_array() || sched.empty()) invalid("schedule", "expected a non-empty array");
  for (std::size_t i = 0; i < sched.size(); ++i) {
    const std::string path = "schedule[" + std::to_string(i) + "]";
    const auto d = as_unsigned(sched[i], path);
    if (d == 0 || d > 4096) invalid(path, "dimensions must lie in [1, 4096]");
    if (!spec.schedule.empty() && d <= spec.schedule.back()) invalid(path, "schedule must be strictly increasing");
    spec.schedule.push_back(d);
  }

  if (doc.contains("measure")) spec.measure = parse_measure(doc["measure"], "measure");

  auto each = [&](std::string_view key, auto&& fn) {
    if (!doc.contains(key)) return;
    const json& arr = doc[std::string(key)];
    if (!arr.is_array()) invalid(std::string(key), "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) fn(arr[i], std::string(key) + "[" + std::to_string(i) + "]");
  };
  each("families", [&](const json& f, const std::string& p) { spec.families.push_back(parse_family(f, p)); });
  each("operators", [&](const json& o, const std::string& p) { spec.operators.push_back(parse_operator(o, p)); });
  each("tasks", [&](const json& t, const std::string& p) { spec.tasks.push_back(parse_task(t, p)); });

  check_references(spec);
  if (!spec.seed && uses_random_probes(spec)) invalid("seed", "required when random probes or random families are used");
  return spec;
}

// ---------------------------------------------------------------------------
// Canonical output
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal; non-finite values become strings.
inline json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline json vector_json(std::span<const Complex> v) {
  json out = json::array();
  for (const auto& z : v) out.push_back(json::array({number(z.real()), number(z.imag())}));
  return out;
}

namespace detail {

inline void dump_canonical(const json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner_pad(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {  // std::map: keys already sorted
        if (!first) out += ",\n";
        first = false;
        out += inner_pad + json(key).dump() + ": ";
        dump_canonical(value, out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_canonical(j[i], out, indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner_pad;
        dump_canonical(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: out += format_double(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

}  // namespace detail

/// Sorted keys, two-space indentation, shortest round-trip floats.
inline std::string canonical_json(const json& j) {
  std::string out;
  detail::dump_canonical(j, out, 0);
  out += "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct TrendRow {
  std::size_t dimension = 0;
  double constant = 0.0;
  std::string verdict;
};

struct TrendTable {
  std::string name;
  std::vector<TrendRow> rows;
};

struct RunReport {
  json document;
  std::vector<TrendTable> trends;
  bool any_failure = false;
};

struct RunOptions {
  double tol = kDefaultTol;
};

struct Instance {
  VectorFamily family;
  MeasureSpace measure;
  Geometry geometry;
};

/// Resolves families and operators of a spec at a given truncation.
class Workspace {
 public:
  explicit Workspace(const ExperimentSpec& spec) : spec_(spec) {}

  MeasureRule measure_rule(const FamilySpec& f) const {
    const MeasureSpec m = f.measure ? *f.measure : spec_.measure;
    return [m](std::size_t count, std::size_t) {
      switch (m.kind) {
        case MeasureSpec::Kind::Counting: return MeasureSpace::counting(count);
        case MeasureSpec::Kind::Weights: return MeasureSpace::weighted(weights(m, count));
        case MeasureSpec::Kind::Partition: {
          std::vector<std::size_t> sizes;
          std::size_t total = 0;
          for (std::size_t k = 1; total < count; ++k) {
            sizes.push_back(block_size(m, k));
            total += sizes.back();
          }
          if (total != count) {
            throw Error(ErrorKind::PartitionMissing, "partition blocks do not tile " + std::to_string(count) + " points");
          }
          return MeasureSpace::from_block_sizes(sizes, weights(m, count));
        }
      }
      throw Error(ErrorKind::InvalidArgument, "unknown measure kind");
    };
  }

  FamilyGenerator generator(const FamilySpec& f) const {
    const std::string& c = f.constructor;
    auto diag = [](std::function<Complex(std::size_t)> entry) {
      return [entry](std::size_t n, std::size_t d) {
        CVector v(d);
        v[n] = entry(n + 1);
        return v;
      };
    };
    auto square = [](std::size_t d) { return d; };
    if (c == "onb") return {f.name, square, diag([](std::size_t) { return Complex{1.0, 0.0}; })};
    if (c == "diagonal") {
      const Expression rule = *f.rule;
      return {f.name, square, diag([rule](std::size_t n) { return Complex{rule.evaluate(static_cast<double>(n)), 0.0}; })};
    }
    if (c == "weighted_onb") {
      const WeightSequence m = weight_sequence(*f.rule);
      if (f.side == "psi") return {f.name, square, diag([m](std::size_t n) { return m.at(n); })};
      return {f.name, square, diag([m](std::size_t n) { return 1.0 / std::conj(m.at(n)); })};
    }
    if (c == "metric") {
      const OperatorSpec g = metric_from_operator(operator_spec(f.op));
      return {f.name, square, [g](std::size_t n, std::size_t d) {
                return g.section(d).column(n);
              }};
    }
    if (c == "random_frame") {
      const double os = f.oversampling;
      const std::uint64_t seed = spec_.seed.value_or(0) ^ detail::fnv1a(f.name);
      return {f.name, [os](std::size_t d) { return static_cast<std::size_t>(std::ceil(os * static_cast<double>(d))); },
              [seed](std::size_t n, std::size_t d) {
                auto gen = ProbeGenerator::for_stream(seed, n);
                return gen.gaussian_vector(d);
              }};
    }
    if (c == "partition_G") {
      const auto rule = measure_rule(f);
      const MeasureSpec m = f.measure ? *f.measure : spec_.measure;
      const OperatorSpec g = operator_spec(f.op);
      const bool phi = f.side == "phi";
      return {f.name,
              [m](std::size_t d) {
                std::size_t total = 0;
                for (std::size_t k = 1; k <= d; ++k) total += block_size(m, k);
                return total;
              },
              [m, g, phi](std::size_t n, std::size_t d) {
                std::size_t count = 0, block = 0, start = 0;
                for (std::size_t k = 1; k <= d; ++k) {
                  const std::size_t s = block_size(m, k);
                  if (n < count + s) {
                    block = k - 1;
                    start = count;
                    break;
                  }
                  count += s;
                }
                double mass = 0.0;
                const auto w = weights(m, start + block_size(m, block + 1));
                for (std::size_t i = start; i < start + block_size(m, block + 1); ++i) mass += w[i];
                CVector v(d);
                if (phi) {
                  const ComplexMatrix gs = g.section(d);
                  for (std::size_t j = 0; j < d; ++j) v[j] = gs(j, block) / std::sqrt(mass);
                } else {
                  v[block] = 1.0 / std::sqrt(mass);
                }
                return v;
              }};
    }
    if (c == "explicit") {
      const auto vectors = f.vectors;
      return {f.name, [n = vectors.size()](std::size_t) { return n; },
              [vectors](std::size_t n, std::size_t d) {
                if (d > vectors[n].size()) {
                  throw Error(ErrorKind::DimensionMismatch, "explicit family has no section of dimension " +
                                                                std::to_string(d));
                }
                return CVector(vectors[n].begin(), vectors[n].begin() + static_cast<std::ptrdiff_t>(d));
              }};
    }
    throw Error(ErrorKind::InvalidArgument, "family '" + f.name + "' has no generator");
  }

  Instance instance(std::string_view name, std::size_t d) const {
    const FamilySpec& f = *spec_.family(name);
    if (f.constructor == "rkhs") {
      const Expression w = *f.rule;
      const auto kf = gaussian_kernel_family(uniform_grid(d, f.lo, f.hi), f.bandwidth,
                                             [w](double x) { return w.evaluate(0.0, x); }, f.power);
      auto pair = rkhs_pair(kf);
      VectorFamily fam = f.side == "phi" ? std::move(pair.phi) : std::move(pair.psi);
      const std::size_t count = fam.count();
      return {std::move(fam), measure_rule(f)(count, d), std::move(pair.geometry)};
    }
    VectorFamily fam = generator(f).materialize(d);
    const std::size_t count = fam.count();
    return {std::move(fam), measure_rule(f)(count, d), Geometry{}};
  }

  /// Library representation of an operator that does not depend on a family.
  OperatorSpec operator_spec(std::string_view name) const {
    const OperatorDef& o = *spec_.op(name);
    if (o.kind == "diagonal") {
      const Expression rule = *o.rule;
      return OperatorSpec::diagonal(
          [rule](std::size_t i) { return Complex{rule.evaluate(static_cast<double>(i + 1)), 0.0}; }, o.name);
    }
    if (o.kind == "dense") return OperatorSpec::dense(o.rows, o.name);
    if (o.kind == "identity") return OperatorSpec::identity();
    if (o.kind == "zero") return OperatorSpec::zero();
    if (o.kind == "scaled_identity") return OperatorSpec::scaled_identity(o.value);
    if (o.kind == "metric") return metric_from_operator(operator_spec(o.ref));
    throw Error(ErrorKind::InvalidArgument, "operator '" + o.name + "' depends on a family section");
  }

  ComplexMatrix section(std::string_view name, std::size_t d) const {
    const OperatorDef& o = *spec_.op(name);
    if (o.kind == "frame_operator") {
      const Instance inst = instance(o.ref, d);
      return synthesis_operator(inst.family, inst.measure) *
             analysis_operator(inst.family, inst.measure, inst.geometry).matrix;
    }
    if (o.kind == "metric" && spec_.op(o.ref)->kind == "frame_operator") {
      const ComplexMatrix s = section(o.ref, d);
      return hermitian_part(ComplexMatrix::identity(d) + s.adjoint() * s);
    }
    return operator_spec(name).section(d);
  }

  static std::vector<double> weights(const MeasureSpec& m, std::size_t count) {
    if (!m.weight_values.empty()) {
      if (m.weight_values.size() < count) {
        throw Error(ErrorKind::DimensionMismatch, "measure lists " + std::to_string(m.weight_values.size()) +
                                                      " weights but " + std::to_string(count) + " are needed");
      }
      return {m.weight_values.begin(), m.weight_values.begin() + static_cast<std::ptrdiff_t>(count)};
    }
    std::vector<double> w(count, 1.0);
    if (m.weight_rule) {
      for (std::size_t n = 0; n < count; ++n) w[n] = m.weight_rule->evaluate(static_cast<double>(n + 1));
    }
    return w;
  }

  static std::size_t block_size(const MeasureSpec& m, std::size_t k) {
    const double s = m.block_size->evaluate(static_cast<double>(k));
    if (!(s >= 1.0) || s > 1e6 || std::abs(s - std::round(s)) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "block size rule must give positive integers (block " +
                                                  std::to_string(k) + ")");
    }
    return static_cast<std::size_t>(std::llround(s));
  }

  static WeightSequence weight_sequence(const Expression& rule) {
    return {[rule](std::size_t n) { return Complex{rule.evaluate(static_cast<double>(n)), 0.0}; }, std::nullopt,
            false};
  }

 private:
  const ExperimentSpec& spec_;
};

namespace detail {

inline json bounds_json(const BoundsReport& r) {
  json j;
  j["kind"] = r.kind;
  j["constant"] = number(r.constant);
  if (r.secondary) j["secondary"] = number(*r.secondary);
  j["verdict"] = to_string(r.verdict);
  j["residual"] = number(r.residual);
  if (!r.note.empty()) j["note"] = r.note;
  j["witness"] = vector_json(r.extremizer);
  return j;
}

inline const char* holds(bool b) { return b ? "holds" : "fails"; }

struct SectionResult {
  json entry;
  std::vector<std::pair<std::string, TrendRow>> rows;  // series name -> row
};

inline SectionResult from_bounds(const BoundsReport& r, std::size_t d) {
  return {bounds_json(r), {{"", {d, r.constant, to_string(r.verdict)}}}};
}

inline SectionResult from_dual(const DualReport& r, std::size_t d) {
  json j;
  j["residual"] = number(r.max_residual);
  j["tolerance"] = number(r.tolerance);
  j["verdict"] = holds(r.verdict);
  j["degenerate_family"] = r.degenerate_family;
  j["witness_input"] = vector_json(r.witness_input);
  j["witness_defect"] = vector_json(r.witness_defect);
  return {j, {{"", {d, r.max_residual, holds(r.verdict)}}}};
}

inline double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace detail

class Runner {
 public:
  Runner(const ExperimentSpec& spec, RunOptions options) : spec_(spec), options_(options), ws_(spec) {}

  RunReport run() {
    RunReport report;
    json tasks = json::array();
    for (std::size_t i = 0; i < spec_.tasks.size(); ++i) {
      tasks.push_back(run_task(i, report));
    }
    json env;
    env["version"] = kVersion;
    env["seed"] = spec_.seed ? json(*spec_.seed) : json(nullptr);
    env["tolerance"] = number(options_.tol);
    env["probe_generator"] = "mt19937_64; Box-Muller normals; complex entries with N(0, 1/2) parts";
    json trends = json::array();
    for (const auto& t : report.trends) {
      trends.push_back({{"name", t.name}, {"file", "trends/" + t.name + ".csv"}, {"rows", t.rows.size()}});
    }
    report.document["environment"] = env;
    report.document["schedule"] = spec_.schedule;
    report.document["tasks"] = tasks;
    report.document["trends"] = trends;
    return report;
  }

 private:
  json run_task(std::size_t index, RunReport& report) {
    const TaskSpec& t = spec_.tasks[index];
    const double tol = t.tol.value_or(options_.tol);
    json out;
    out["index"] = index;
    out["task"] = t.task;
    out["family"] = t.family;
    if (!t.dual.empty()) out["dual"] = t.dual;
    if (!t.op.empty()) out["operator"] = t.op;
    if (!t.a_operator.empty()) out["a_operator"] = t.a_operator;
    out["tolerance"] = number(tol);
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%02zu", index);
    const std::string base = std::string(prefix) + "_" + t.task + "_" + t.family;
    bool failed = false;

    if (t.task == "classify") {
      try {
        const FamilySpec& f = *spec_.family(t.family);
        const auto cls = classify(ws_.generator(f), ws_.measure_rule(f), TruncationSchedule::make(spec_.schedule));
        out["class"] = to_string(cls.value);
        out["lambda_min_slope"] = number(cls.lambda_min.slope);
        out["lambda_max_slope"] = number(cls.lambda_max.slope);
        out["lambda_min_trend"] = to_string(cls.lambda_min.trend);
        out["lambda_max_trend"] = to_string(cls.lambda_max.trend);
        out["mu_total_everywhere"] = cls.mu_total_everywhere;
        TrendTable lo{base + "_lambda_min", {}}, hi{base + "_lambda_max", {}};
        json sections = json::array();
        for (const auto& s : cls.sections) {
          sections.push_back({{"dimension", s.dimension},
                              {"lambda_min", number(s.lambda_min)},
                              {"lambda_max", number(s.lambda_max)},
                              {"mu_total", s.mu_total}});
          lo.rows.push_back({s.dimension, s.lambda_min, s.mu_total ? "total" : "not_total"});
          hi.rows.push_back({s.dimension, s.lambda_max, "finite"});
        }
        out["sections"] = sections;
        report.trends.push_back(std::move(lo));
        report.trends.push_back(std::move(hi));
      } catch (const Error& e) {
        out["error"] = error_json(e);
        failed = true;
      }
    } else {
      std::map<std::string, TrendTable> tables;
      json results = json::array();
      auto probes = ProbeGenerator::for_stream(spec_.seed.value_or(0), index);
      for (const auto d : spec_.schedule) {
        json entry;
        try {
          auto section = run_section(t, d, tol, probes);
          entry = std::move(section.entry);
          entry["status"] = "ok";
          for (auto& [series, row] : section.rows) {
            const std::string name = series.empty() ? base : base + "_" + series;
            auto& table = tables[name];
            table.name = name;
            table.rows.push_back(std::move(row));
          }
        } catch (const Error& e) {
          entry["status"] = "error";
          entry["error"] = error_json(e);
          failed = true;
        }
        entry["dimension"] = d;
        results.push_back(std::move(entry));
      }
      out["results"] = std::move(results);
      for (auto& [name, table] : tables) report.trends.push_back(std::move(table));
    }
    out["status"] = failed ? "failed" : "ok";
    report.any_failure = report.any_failure || failed;
    return out;
  }

  static json error_json(const Error& e) {
    json j;
    j["kind"] = to_string(e.kind());
    j["message"] = e.message();
    if (!e.witness().empty()) j["witness"] = vector_json(e.witness());
    if (e.index()) j["index"] = *e.index();
    return j;
  }

  detail::SectionResult run_section(const TaskSpec& t, std::size_t d, double tol, ProbeGenerator& probes) {
    using namespace detail;
    const Instance in = ws_.instance(t.family, d);
    const VectorFamily& fam = in.family;
    const MeasureSpace& sp = in.measure;
    const auto op = [&] { return ws_.section(t.op, d); };

    if (t.task == "bessel_bound") return from_bounds(bessel_bound(fam, sp, in.geometry), d);
    if (t.task == "lower_frame_bound") return from_bounds(lower_frame_bound(fam, sp, in.geometry), d);
    if (t.task == "mu_total") {
      const bool total = mu_total_check(fam, sp, in.geometry);
      const auto s = svd(analysis_operator(fam, sp, in.geometry).matrix);
      const double smallest = s.singular_values.size() >= d ? s.singular_values[d - 1] : 0.0;
      json j{{"verdict", holds(total)}, {"smallest_singular_value", number(smallest)}};
      return {j, {{"", {d, smallest, holds(total)}}}};
    }
    if (t.task == "weak_A_frame") return from_bounds(weak_A_frame_alpha(fam, sp, op()), d);
    if (t.task == "weak_upper") return from_bounds(weak_upper_alpha(fam, sp, op()), d);
    if (t.task == "controlled_frame") return from_bounds(controlled_frame_bounds(fam, sp, op()), d);
    if (t.task == "alt_upper") {
      const auto r = alt_upper_checks(fam, sp, op());
      json j{{"composed", bounds_json(r.composed)},
             {"real_part", bounds_json(r.real_part)},
             {"a_bessel", bounds_json(r.a_bessel)}};
      return {j,
              {{"composed", {d, r.composed.constant, to_string(r.composed.verdict)}},
               {"real_part", {d, r.real_part.constant, to_string(r.real_part.verdict)}},
               {"a_bessel", {d, r.a_bessel.constant, to_string(r.a_bessel.verdict)}}}};
    }
    if (t.task == "canonical_dual") {
      const VectorFamily chi = canonical_dual(fam, sp);
      const ComplexMatrix recon = synthesis_operator(chi, sp) * analysis_operator(fam, sp).matrix;
      double worst = 0.0;
      for (std::size_t k = 0; k < t.probes; ++k) {
        const CVector f = probes.unit_vector(d);
        worst = std::max(worst, norm(recon.apply(f) - f));
      }
      const bool ok = worst <= tol * std::max(1.0, std::sqrt(static_cast<double>(d)));
      json j{{"verdict", holds(ok)},
             {"reconstruction_residual", number(worst)},
             {"dual_bessel_bound", number(bessel_bound(chi, sp).constant)},
             {"probes", t.probes}};
      return {j, {{"", {d, worst, holds(ok)}}}};
    }
    if (t.task == "dual_pair") {
      const Instance dual = ws_.instance(t.dual, d);
      return from_dual(dual_pair_check(fam, dual.family, sp, tol, in.geometry), d);
    }
    if (t.task == "weak_G_dual") {
      const Instance dual = ws_.instance(t.dual, d);
      return from_dual(weak_G_dual_check(fam, dual.family, sp, op(), tol, in.geometry), d);
    }
    if (t.task == "lower_atomic_loop") {
      const ComplexMatrix b = op();
      const auto fac = lower_factorize(b, fam, sp);
      const VectorFamily psi = bessel_dual_from_factor(fac, sp);
      const double m_norm = spectral_norm(fac.factor);
      const double psi_bound = bessel_bound(psi, sp).constant;
      const auto dual = weak_G_dual_check(fam, psi, sp, b, std::max(tol, 1e-8));
      double gamma = 0.0, worst_ratio = 0.0;
      for (std::size_t k = 0; k < t.probes; ++k) {
        const CVector f = probes.unit_vector(d);
        const auto a = atomic_coefficients(f, psi, sp, b, fam);
        gamma = a.gamma;
        worst_ratio = std::max(worst_ratio, norm(a.coefficients));
      }
      const bool ok = psi_bound <= m_norm * m_norm + 1e-9 && dual.verdict && worst_ratio <= gamma + 1e-9 &&
                      m_norm <= fac.lambda_hat + 1e-9;
      json j{{"verdict", holds(ok)},
             {"lambda_hat", number(fac.lambda_hat)},
             {"factor_norm", number(m_norm)},
             {"factor_residual", number(fac.residual)},
             {"dual_bessel_bound", number(psi_bound)},
             {"dual_residual", number(dual.max_residual)},
             {"gamma", number(gamma)},
             {"max_coefficient_norm", number(worst_ratio)},
             {"note", fac.note}};
      return {j, {{"", {d, fac.lambda_hat, holds(ok)}}}};
    }
    if (t.task == "upper_factorize") {
      const auto fac = upper_factorize(fam, sp, op());
      json j{{"lambda_hat", number(fac.lambda_hat)},
             {"factor_norm", number(spectral_norm(fac.factor))},
             {"residual", number(fac.residual)},
             {"note", fac.note}};
      const bool ok = fac.residual <= 1e-8 * std::max(1.0, analysis_operator(fam, sp).matrix.frobenius_norm());
      j["verdict"] = holds(ok);
      return {j, {{"", {d, fac.lambda_hat, holds(ok)}}}};
    }
    if (t.task == "aphi_chain") {
      const Instance phi = ws_.instance(t.dual, d);
      return from_bounds(aphi_lower_chain(fam, phi.family, sp, op(), ws_.section(t.a_operator, d), tol), d);
    }
    if (t.task == "coercivity") {
      const auto r = coercivity_constants(fam, sp, op());
      json j{{"alpha_prime", number(r.alpha_prime)},
             {"gamma", number(r.gamma)},
             {"verdict", holds(r.holds)},
             {"note", r.note},
             {"witness", vector_json(r.extremizer)}};
      return {j, {{"", {d, r.alpha_prime, holds(r.holds)}}}};
    }
    if (t.task == "weak_expansion") {
      CVector rhs(d);
      for (std::size_t n = 0; n < d; ++n) rhs[n] = t.rhs->evaluate(static_cast<double>(n + 1));
      const CVector w = weak_expansion(fam, sp, op(), rhs);
      double worst = 0.0;
      for (std::size_t k = 0; k < t.probes; ++k) {
        const CVector f = probes.unit_vector(d);
        worst = std::max(worst, std::abs(inner(rhs, f) - omega_form(fam, sp, w, f)));
      }
      const bool ok = worst <= 1e-9 * std::max(1.0, norm(rhs));
      json j{{"verdict", holds(ok)}, {"expansion_residual", number(worst)}, {"solution", vector_json(w)}};
      return {j, {{"", {d, worst, holds(ok)}}}};
    }
    throw Error(ErrorKind::InvalidArgument, "unknown task '" + t.task + "'");
  }

  const ExperimentSpec& spec_;
  RunOptions options_;
  Workspace ws_;
};

inline RunReport run(const ExperimentSpec& spec, RunOptions options = {}) { return Runner(spec, options).run(); }

inline std::string trend_csv(const TrendTable& t) {
  std::string out = "dimension,constant,verdict\n";
  for (const auto& r : t.rows) out += std::to_string(r.dimension) + "," + format_double(r.constant) + "," + r.verdict + "\n";
  return out;
}

/// Writes report.json and trends/<name>.csv under `dir`.
inline void emit(const RunReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "trends", ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create '" + (dir / "trends").string() + "': " + ec.message());
  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + p.string() + "'");
  };
  write(dir / "report.json", canonical_json(report.document));
  for (const auto& t : report.trends) write(dir / "trends" / (t.name + ".csv"), trend_csv(t));
}

/// SEMIFRAME_TOL if set and valid, otherwise the default.
inline double environment_tolerance() {
  const char* env = std::getenv("SEMIFRAME_TOL");
  if (!env) return kDefaultTol;
  double v = 0.0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::ValidationError, "SEMIFRAME_TOL: expected a positive number, got '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace semiframe::experiment
