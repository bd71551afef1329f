#include "gainpath/io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gainpath {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing field");
  return *it;
}

const json* optional_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

long integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

std::string at(const std::string& path, std::size_t k) {
  return path + "[" + std::to_string(k) + "]";
}

const json& params_of(const json& obj, const std::string& path) {
  static const json kEmpty = json::object();
  const json* p = optional_field(obj, "params");
  if (!p) return kEmpty;
  if (!p->is_object()) fail(path + ".params", "expected an object");
  return *p;
}

// Re-labels library errors raised while constructing a value at `path`.
template <typename F>
auto guarded(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

ScalarFn parse_gain(const json& g, const std::string& path) {
  const std::string kind = text(field(g, "kind", path), path + ".kind");
  const json& p = params_of(g, path);
  const std::string pp = path + ".params";
  return guarded(path, [&] {
    if (kind == "zero") return ScalarFn::Zero();
    if (kind == "identity") return ScalarFn::Identity();
    if (kind == "linear") return ScalarFn::Linear(number(field(p, "a", pp), pp + ".a"));
    if (kind == "power") {
      return ScalarFn::Power(number(field(p, "a", pp), pp + ".a"),
                             number(field(p, "p", pp), pp + ".p"));
    }
    if (kind == "piecewise-linear") {
      const json& pts = array(field(p, "points", pp), pp + ".points");
      std::vector<ScalarFn::Point> points;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const std::string ppk = at(pp + ".points", k);
        if (!pts[k].is_array() || pts[k].size() != 2) fail(ppk, "expected [x, y]");
        points.push_back({number(pts[k][0], ppk + "[0]"), number(pts[k][1], ppk + "[1]")});
      }
      std::optional<double> tail;
      if (const json* t = optional_field(p, "tail_slope")) tail = number(*t, pp + ".tail_slope");
      return ScalarFn::PiecewiseLinear(std::move(points), tail);
    }
    fail(path + ".kind", "unknown gain kind '" + kind + "'");
  });
}

MafSpec parse_maf(const json& m, const std::string& path) {
  const std::string kind = text(field(m, "kind", path), path + ".kind");
  const json& p = params_of(m, path);
  const std::string pp = path + ".params";
  return guarded(path, [&] {
    if (kind == "max") return MafSpec::Max();
    if (kind == "sum") return MafSpec::Sum();
    if (kind == "weighted-sum") {
      const json& w = array(field(p, "weights", pp), pp + ".weights");
      std::vector<double> weights;
      for (std::size_t k = 0; k < w.size(); ++k) {
        weights.push_back(number(w[k], at(pp + ".weights", k)));
      }
      return MafSpec::WeightedSum(std::move(weights));
    }
    if (kind == "p-sum") return MafSpec::PSum(number(field(p, "p", pp), pp + ".p"));
    fail(path + ".kind", "unknown MAF kind '" + kind + "'");
  });
}

json gain_json(const ScalarFn& f) {
  switch (f.kind()) {
    case ScalarFn::Kind::kZero:
      return {{"kind", "zero"}};
    case ScalarFn::Kind::kLinear:
      return {{"kind", "linear"}, {"params", {{"a", f.coefficient()}}}};
    case ScalarFn::Kind::kPower:
      return {{"kind", "power"},
              {"params", {{"a", f.coefficient()}, {"p", f.exponent()}}}};
    case ScalarFn::Kind::kPiecewiseLinear: {
      json pts = json::array();
      for (const auto& pt : f.points()) pts.push_back({pt.x, pt.y});
      return {{"kind", "piecewise-linear"},
              {"params", {{"points", pts}, {"tail_slope", f.tail_slope()}}}};
    }
  }
  return {};
}

json maf_json(const MafSpec& m) {
  switch (m.kind()) {
    case MafSpec::Kind::kMax:
      return {{"kind", "max"}};
    case MafSpec::Kind::kSum:
      return {{"kind", "sum"}};
    case MafSpec::Kind::kWeightedSum:
      return {{"kind", "weighted-sum"}, {"params", {{"weights", m.weights()}}}};
    case MafSpec::Kind::kPSum:
      return {{"kind", "p-sum"}, {"params", {{"p", m.p()}}}};
  }
  return {};
}

std::size_t node_index(const json& v, std::size_t n, const std::string& path) {
  const long id = integer(v, path);
  if (id < 1 || static_cast<std::size_t>(id) > n) {
    fail(path, "node id " + std::to_string(id) + " outside 1.." + std::to_string(n));
  }
  return static_cast<std::size_t>(id - 1);
}

SubsystemModel parse_model_fields(const json& d, const std::string& path) {
  SubsystemModel m;
  const std::string kind =
      optional_field(d, "kind") ? text(d["kind"], path + ".kind") : "linear";
  if (kind == "linear") {
    m.dynamics = SubsystemModel::Dynamics::kLinear;
  } else if (kind == "saturating") {
    m.dynamics = SubsystemModel::Dynamics::kSaturating;
  } else {
    fail(path + ".kind", "unknown dynamics kind '" + kind + "'");
  }
  m.a = number(field(d, "a", path), path + ".a");
  if (const json* c = optional_field(d, "c")) m.c = number(*c, path + ".c");
  if (const json* s = optional_field(d, "lyap_scale")) {
    m.lyap_scale = number(*s, path + ".lyap_scale");
  }
  if (const json* s = optional_field(d, "state_dim")) {
    const long dim = integer(*s, path + ".state_dim");
    if (dim < 1) fail(path + ".state_dim", "must be positive");
    m.state_dim = static_cast<std::size_t>(dim);
  }
  m.psi1 = ScalarFn::Linear(m.lyap_scale);
  m.psi2 = ScalarFn::Linear(m.lyap_scale);
  return m;
}

std::vector<SubsystemModel> parse_dynamics(const json& d, std::size_t n,
                                           const std::string& path) {
  std::vector<SubsystemModel> models;
  if (const json* t = optional_field(d, "template")) {
    const std::string tp = path + ".template";
    const SubsystemModel base = parse_model_fields(*t, tp);
    const json& cpl = array(field(*t, "coupling", tp), tp + ".coupling");
    for (std::size_t i = 0; i < n; ++i) {
      SubsystemModel m = base;
      for (std::size_t k = 0; k < cpl.size(); ++k) {
        const std::string ck = at(tp + ".coupling", k);
        const long off = integer(field(cpl[k], "offset", ck), ck + ".offset");
        const double b = number(field(cpl[k], "b", ck), ck + ".b");
        const long j = static_cast<long>(i) + off;
        if (off == 0) fail(ck + ".offset", "offset 0 couples a node to itself");
        if (j >= 0 && j < static_cast<long>(n)) m.coupling.emplace_back(j, b);
      }
      models.push_back(std::move(m));
    }
    return models;
  }
  const json& nodes = array(field(d, "nodes", path), path + ".nodes");
  std::vector<std::optional<SubsystemModel>> slots(n);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string nk = at(path + ".nodes", k);
    const std::size_t i = node_index(field(nodes[k], "id", nk), n, nk + ".id");
    if (slots[i]) fail(nk + ".id", "duplicate node id");
    SubsystemModel m = parse_model_fields(nodes[k], nk);
    if (const json* cpl = optional_field(nodes[k], "coupling")) {
      array(*cpl, nk + ".coupling");
      for (std::size_t q = 0; q < cpl->size(); ++q) {
        const std::string cq = at(nk + ".coupling", q);
        const std::size_t j = node_index(field((*cpl)[q], "j", cq), n, cq + ".j");
        m.coupling.emplace_back(j, number(field((*cpl)[q], "b", cq), cq + ".b"));
      }
    }
    slots[i] = std::move(m);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!slots[i]) fail(path + ".nodes", "no dynamics for node " + std::to_string(i + 1));
    models.push_back(std::move(*slots[i]));
  }
  return models;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& s, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k < s.size() && k + 1 < byte; ++k) {
    if (s[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

double parse_number_token(const std::string& tok, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(what + ": '" + tok + "' is not a number");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

json vector_json(const PlusVector& v) { return json(v.data()); }

}  // namespace

NetworkDocument parse_network(const std::string& content,
                              std::optional<std::size_t> truncation) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(content, e.byte);
    throw ParseError("line " + std::to_string(line) + ", column " +
                     std::to_string(col) + ": malformed JSON");
  }
  const std::string root = "$";
  if (!doc.is_object()) fail(root, "expected an object");
  const long version = integer(field(doc, "version", root), "$.version");
  if (version != 1) fail("$.version", "unsupported version " + std::to_string(version));

  NetworkDocument out;
  const json* tmpl = optional_field(doc, "template");
  const json* nfield = optional_field(doc, "n");
  if ((tmpl != nullptr) == (nfield != nullptr)) {
    fail(root, "exactly one of 'n' and 'template' is required");
  }
  if (tmpl) {
    const std::string tp = "$.template";
    BandTemplate band;
    const long size = integer(field(*tmpl, "size", tp), tp + ".size");
    if (size < 1) fail(tp + ".size", "must be positive");
    band.size = static_cast<std::size_t>(size);
    band.maf = parse_maf(field(*tmpl, "maf", tp), tp + ".maf");
    const json& offs = array(field(*tmpl, "offsets", tp), tp + ".offsets");
    for (std::size_t k = 0; k < offs.size(); ++k) {
      const std::string ok = at(tp + ".offsets", k);
      BandTemplate::Offset off;
      off.offset = integer(field(offs[k], "offset", ok), ok + ".offset");
      off.gain = parse_gain(field(offs[k], "gain", ok), ok + ".gain");
      if (const json* w = optional_field(offs[k], "weight")) off.weight = number(*w, ok + ".weight");
      band.offsets.push_back(std::move(off));
    }
    if (const json* e = optional_field(*tmpl, "external_gain")) {
      band.external_gain = parse_gain(*e, tp + ".external_gain");
    }
    const std::size_t n = truncation.value_or(band.size);
    if (n < 1) fail("truncation", "must be positive");
    out.spec = guarded(tp, [&] { return NetworkSpec::FromTemplate(band, n); });
    out.templated = true;
  } else {
    if (truncation) fail("truncation", "only templated networks can be truncated");
    const long n = integer(*nfield, "$.n");
    if (n < 1) fail("$.n", "must be positive");
    NetworkSpec spec = NetworkSpec::Isolated(static_cast<std::size_t>(n));
    std::vector<bool> seen(spec.n, false);
    if (const json* nodes = optional_field(doc, "nodes")) {
      array(*nodes, "$.nodes");
      for (std::size_t k = 0; k < nodes->size(); ++k) {
        const std::string nk = at("$.nodes", k);
        const json& node = (*nodes)[k];
        const std::size_t i = node_index(field(node, "id", nk), spec.n, nk + ".id");
        if (seen[i]) fail(nk + ".id", "duplicate node id " + std::to_string(i + 1));
        seen[i] = true;
        spec.mafs[i] = parse_maf(field(node, "maf", nk), nk + ".maf");
        if (const json* nbs = optional_field(node, "neighbors")) {
          array(*nbs, nk + ".neighbors");
          for (std::size_t q = 0; q < nbs->size(); ++q) {
            const std::string nq = at(nk + ".neighbors", q);
            const std::size_t j = node_index(field((*nbs)[q], "j", nq), spec.n, nq + ".j");
            if (j == i) fail(nq + ".j", "a node cannot be its own neighbor");
            if (spec.gains.count({i, j})) fail(nq + ".j", "duplicate neighbor");
            spec.connect(i, j, parse_gain(field((*nbs)[q], "gain", nq), nq + ".gain"));
          }
        }
        if (const json* e = optional_field(node, "external_gain")) {
          spec.external_gains[i] = parse_gain(*e, nk + ".external_gain");
        }
      }
    }
    guarded("$.nodes", [&] {
      check_structure(spec);
      return 0;
    });
    out.spec = std::move(spec);
  }
  if (const json* d = optional_field(doc, "dynamics")) {
    out.dynamics = parse_dynamics(*d, out.spec.n, "$.dynamics");
    guarded("$.dynamics", [&] {
      check_coupling(out.spec, *out.dynamics);
      return 0;
    });
  }
  return out;
}

NetworkDocument load_network(const std::string& path,
                             std::optional<std::size_t> truncation) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  NetworkDocument doc;
  try {
    doc = parse_network(buf.str(), truncation);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
  ValidationReport report = validate_network(doc.spec);
  if (!report.passed()) {
    std::string what = path + ": validation failed";
    for (const auto& c : report.checks) {
      if (!c.passed) what += "; " + c.name + ": " + c.detail;
    }
    throw InvalidNetworkError(std::move(report), what);
  }
  return doc;
}

std::string serialize_network(const NetworkSpec& spec,
                              const std::optional<std::vector<SubsystemModel>>& dynamics) {
  json doc;
  doc["version"] = 1;
  doc["n"] = spec.n;
  json nodes = json::array();
  for (std::size_t i = 0; i < spec.n; ++i) {
    json node;
    node["id"] = i + 1;
    node["maf"] = maf_json(spec.mafs[i]);
    json nbs = json::array();
    for (std::size_t j : spec.neighbors[i]) {
      nbs.push_back({{"j", j + 1}, {"gain", gain_json(spec.gains.at({i, j}))}});
    }
    node["neighbors"] = nbs;
    if (i < spec.external_gains.size() && spec.external_gains[i]) {
      node["external_gain"] = gain_json(*spec.external_gains[i]);
    }
    nodes.push_back(node);
  }
  doc["nodes"] = nodes;
  if (dynamics) {
    json dn = json::array();
    for (std::size_t i = 0; i < dynamics->size(); ++i) {
      const SubsystemModel& m = (*dynamics)[i];
      json cpl = json::array();
      for (const auto& [j, b] : m.coupling) cpl.push_back({{"j", j + 1}, {"b", b}});
      dn.push_back({{"id", i + 1},
                    {"kind", m.dynamics == SubsystemModel::Dynamics::kLinear
                                 ? "linear"
                                 : "saturating"},
                    {"a", m.a},
                    {"c", m.c},
                    {"lyap_scale", m.lyap_scale},
                    {"state_dim", m.state_dim},
                    {"coupling", cpl}});
    }
    doc["dynamics"] = {{"nodes", dn}};
  }
  return doc.dump(2) + "\n";
}

ScalarFn parse_function_flag(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string params = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const std::string what = "function '" + spec + "'";
  try {
    if (kind == "identity" && params.empty()) return ScalarFn::Identity();
    if (kind == "linear") return ScalarFn::Linear(parse_number_token(params, what));
    if (kind == "power") {
      const auto parts = split(params, ',');
      if (parts.size() != 2) throw ParseError(what + ": power needs a,p");
      return ScalarFn::Power(parse_number_token(parts[0], what),
                             parse_number_token(parts[1], what));
    }
    if (kind == "piecewise-linear") {
      std::vector<ScalarFn::Point> pts;
      for (const auto& pair : split(params, ';')) {
        const auto xy = split(pair, ',');
        if (xy.size() != 2) throw ParseError(what + ": points are x,y pairs");
        pts.push_back({parse_number_token(xy[0], what), parse_number_token(xy[1], what)});
      }
      return ScalarFn::PiecewiseLinear(std::move(pts));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(what + ": " + e.what());
  }
  throw ParseError(what + ": unknown kind '" + kind + "'");
}

std::vector<double> parse_grid_flag(const std::string& spec) {
  const auto parts = split(spec, ':');
  const std::string what = "grid '" + spec + "'";
  if (parts.size() != 3) throw ParseError(what + ": expected a:b:points");
  const double a = parse_number_token(parts[0], what);
  const double b = parse_number_token(parts[1], what);
  const double p = parse_number_token(parts[2], what);
  if (!(a > 0.0) || !(b > a) || p < 2 || p != std::floor(p)) {
    throw ParseError(what + ": need 0 < a < b and an integer points >= 2");
  }
  return log_levels(a, b, static_cast<int>(p));
}

std::vector<std::size_t> parse_truncation_flag(const std::string& spec) {
  std::vector<std::size_t> out;
  for (const auto& tok : split(spec, ',')) {
    const double v = parse_number_token(tok, "truncation '" + spec + "'");
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw ParseError("truncation '" + spec + "': sizes must be positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ParseError("truncation: empty list");
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string path_table_csv(const PathTable& table) {
  std::string out = "r,component,sigma\n";
  const auto& grid = table.grid();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t i = 0; i < table.dimension(); ++i) {
      out += format_double(grid[k]);
      out += ',';
      out += std::to_string(i + 1);
      out += ',';
      out += format_double(table.sigma()[k][i]);
      out += '\n';
    }
  }
  return out;
}

std::string certificate_json(const Certificate& cert, int indent) {
  json doc;
  doc["property"] = to_string(cert.property);
  doc["verdict"] = to_string(cert.verdict);
  if (cert.witness) {
    const Witness& w = *cert.witness;
    json wj = json::object();
    if (w.s) wj["s"] = vector_json(*w.s);
    if (w.b) wj["b"] = vector_json(*w.b);
    if (w.i) wj["i"] = *w.i + 1;
    if (w.j) wj["j"] = *w.j + 1;
    if (w.t) wj["t"] = *w.t;
    if (w.k) wj["k"] = *w.k;
    if (w.kind) wj["operator"] = w.kind->describe();
    if (w.f) wj["omega"] = w.f->describe();
    doc["witness"] = wj;
  }
  const Estimate& e = cert.estimate;
  if (e.function || e.scalar || e.m || e.rate || !e.samples.empty() || e.index) {
    json ej = json::object();
    if (e.function) ej["function"] = e.function->describe();
    if (e.scalar) ej["scalar"] = *e.scalar;
    if (e.m) ej["M"] = *e.m;
    if (e.rate) ej["rate"] = *e.rate;
    if (e.index) ej["index"] = *e.index;
    if (!e.samples.empty()) {
      json s = json::array();
      for (const auto& [t, v] : e.samples) s.push_back({t, v});
      ej["samples"] = s;
    }
    doc["estimate"] = ej;
  }
  doc["budget"] = {{"samples", cert.budget.samples},
                   {"iterations", cert.budget.iterations}};
  doc["seed"] = cert.seed;
  if (!cert.notes.empty()) doc["notes"] = cert.notes;
  return doc.dump(indent);
}

}  // namespace gainpath
