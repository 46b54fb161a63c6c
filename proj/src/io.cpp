#include "bamle/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bamle/presets.hpp"

namespace bamle {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string id_of(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw InputError("node id must be a string or integer", where);
}

double number_at(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw InputError("'" + key + "' must be a number", where + "/" + key);
  return v.get<double>();
}


Problem graph_from_json(const json& j, const std::string& src) {
  if (!j.at("nodes").is_array()) throw InputError("'nodes' must be an array", "/nodes");
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  for (std::size_t k = 0; k < j["nodes"].size(); ++k) {
    auto id = id_of(j["nodes"][k], "/nodes/" + std::to_string(k));
    if (!index.emplace(id, labels.size()).second)
      throw InputError("duplicate node id '" + id + "'", "/nodes/" + std::to_string(k));
    labels.push_back(id);
  }
  auto lookup = [&](const std::string& id, const std::string& where) {
    auto it = index.find(id);
    if (it == index.end()) throw InputError("unknown node id '" + id + "'", where);
    return it->second;
  };
  std::vector<std::pair<NodeId, NodeId>> edges;
  if (j.contains("edges")) {
    if (!j["edges"].is_array()) throw InputError("'edges' must be an array", "/edges");
    for (std::size_t k = 0; k < j["edges"].size(); ++k) {
      const auto& e = j["edges"][k];
      const std::string where = "/edges/" + std::to_string(k);
      if (!e.is_array() || e.size() != 2) throw InputError("edge must be a pair [a, b]", where);
      edges.emplace_back(lookup(id_of(e[0], where + "/0"), where + "/0"),
                         lookup(id_of(e[1], where + "/1"), where + "/1"));
    }
  }
  auto table = [&](const char* key) {
    std::unordered_map<NodeId, double> out;
    if (!j.contains(key)) return out;
    const std::string base = std::string("/") + key;
    if (!j[key].is_object()) throw InputError(std::string("'") + key + "' must be an object", base);
    for (auto it = j[key].begin(); it != j[key].end(); ++it) {
      if (!it.value().is_number()) throw InputError("payoff must be a number", base + "/" + it.key());
      out[lookup(it.key(), base + "/" + it.key())] = it.value().get<double>();
    }
    return out;
  };
  auto terminal = table("terminal");
  auto running = table("running");
  const double len = j.contains("edge_length") ? number_at(j, "edge_length", "") : 1.0;
  Problem p;
  p.name = src;
  p.graph = std::make_shared<const BiasedGraph>(BiasedGraph::from_edges(labels, edges, terminal, running, len));
  p.beta = j.contains("beta") ? number_at(j, "beta", "") : 1.0;
  p.epsilon = len;
  p.rescale = [labels, edges, terminal, running, p](double e) {
    Problem q = p;
    q.graph = std::make_shared<const BiasedGraph>(BiasedGraph::from_edges(labels, edges, terminal, running, e));
    q.epsilon = e;
    return q;
  };
  return p;
}

Problem grid_from_json(const json& j, const std::string& src) {
  GridSpec spec;
  spec.dim = j.contains("dim") ? j.at("dim").get<int>() : 2;
  if (spec.dim != 1 && spec.dim != 2) throw InputError("'dim' must be 1 or 2", "/dim");
  if (j.contains("extent")) {
    const auto& e = j["extent"];
    if (e.is_number()) spec.extent = {e.get<double>(), 0.0};
    else if (e.is_array() && e.size() == static_cast<std::size_t>(spec.dim)) {
      for (int a = 0; a < spec.dim; ++a) spec.extent[a] = e[a].get<double>();
    } else {
      throw InputError("'extent' must list one length per axis", "/extent");
    }
  }
  spec.h = number_at(j, "h", "");
  spec.epsilon = j.contains("epsilon") ? number_at(j, "epsilon", "") : spec.h;
  if (j.contains("holes")) {
    for (std::size_t k = 0; k < j["holes"].size(); ++k) {
      const auto& hj = j["holes"][k];
      const std::string where = "/holes/" + std::to_string(k);
      Hole hole{};
      for (int a = 0; a < spec.dim; ++a) {
        hole.lo[a] = hj.at("lo").at(a).get<double>();
        hole.hi[a] = hj.at("hi").at(a).get<double>();
      }
      spec.holes.push_back(hole);
    }
  }
  const double beta = j.contains("beta") ? number_at(j, "beta", "") : 1.0;
  Problem p;
  const auto& b = j.at("boundary");
  if (b.is_string()) {
    auto name = b.get<std::string>();
    BoundaryFn fn;
    try {
      fn = square_boundary(name, beta, j.value("A", 1.0), j.value("c", 0.5));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what(), "/boundary");
    }
    p.grid = std::make_shared<const GridDomain>(spec, fn);
    p.rescale = [spec, fn, beta, src](double e) {
      GridSpec s = spec;
      s.h = e;
      s.epsilon = e;
      Problem q;
      q.name = src;
      q.grid = std::make_shared<const GridDomain>(s, fn);
      q.graph = q.grid->shared_graph();
      q.beta = beta;
      q.epsilon = e;
      return q;
    };
  } else if (b.is_object()) {
    std::unordered_map<std::string, double> values;
    for (auto it = b.begin(); it != b.end(); ++it) {
      if (!it.value().is_number()) throw InputError("boundary value must be a number", "/boundary/" + it.key());
      values[it.key()] = it.value().get<double>();
    }
    p.grid = std::make_shared<const GridDomain>(spec, values);
  } else {
    throw InputError("'boundary' must be a preset name or an object", "/boundary");
  }
  p.name = src;
  p.graph = p.grid->shared_graph();
  p.beta = beta;
  p.epsilon = spec.epsilon;
  return p;
}

}  // namespace

Problem parse_problem(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what(), "byte " + std::to_string(e.byte));
  }
  if (!j.is_object()) throw InputError("top-level value must be an object", "/");
  try {
    if (j.contains("nodes")) return graph_from_json(j, source);
    if (j.contains("h") || j.contains("dim")) return grid_from_json(j, source);
    throw InputError("input is neither a graph (\"nodes\") nor a grid (\"h\")", "/");
  } catch (const json::out_of_range& e) {
    throw InputError(std::string("missing field: ") + e.what(), "/");
  } catch (const json::type_error& e) {
    throw InputError(std::string("wrong value type: ") + e.what(), "/");
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what(), "");
  }
}

Problem load_problem(const std::string& path) { return parse_problem(read_text(path), path); }

std::vector<double> parse_field(const std::string& text, const BiasedGraph& space) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what(), "byte " + std::to_string(e.byte));
  }
  if (!j.is_object() || !j.contains("values") || !j["values"].is_object())
    throw InputError("field file needs a \"values\" object", "/values");
  std::vector<double> u(space.size(), std::numeric_limits<double>::quiet_NaN());
  for (auto it = j["values"].begin(); it != j["values"].end(); ++it) {
    auto node = space.find(it.key());
    if (!node) throw InputError("unknown node id '" + it.key() + "'", "/values/" + it.key());
    if (!it.value().is_number()) throw InputError("value must be a number", "/values/" + it.key());
    u[*node] = it.value().get<double>();
  }
  for (NodeId x = 0; x < space.size(); ++x)
    if (std::isnan(u[x])) throw InputError("missing value for node '" + space.label(x) + "'", "/values");
  return u;
}

std::vector<double> load_field(const std::string& path, const BiasedGraph& space) {
  return parse_field(read_text(path), space);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string field_json(const ValueField& field, const BiasedGraph& space, const std::string& manifest) {
  ojson j;
  ojson values = ojson::object();
  for (NodeId x = 0; x < space.size(); ++x) values[space.label(x)] = field.values.at(x);
  j["values"] = std::move(values);
  j["iterations"] = field.iterations;
  j["residual"] = field.residual;
  j["equation_residual"] = field.equation_residual;
  j["status"] = to_string(field.status);
  j["direction"] = to_string(field.direction);
  if (!field.diagnostic.empty()) j["diagnostic"] = field.diagnostic;
  j["manifest"] = manifest;
  return j.dump(2) + "\n";
}

std::string field_csv(const std::vector<double>& values, const Problem& problem, const std::string& manifest) {
  std::ostringstream os;
  os << "# manifest: " << manifest << "\n";
  const auto& g = problem.space();
  if (problem.grid) {
    const bool two = problem.grid->dim() == 2;
    os << (two ? "node,x,y,value\n" : "node,x,value\n");
    for (NodeId v = 0; v < g.size(); ++v) {
      auto p = problem.grid->coord(v);
      os << '"' << g.label(v) << "\"," << format_number(p[0]) << ',';
      if (two) os << format_number(p[1]) << ',';
      os << format_number(values.at(v)) << "\n";
    }
  } else {
    os << "node,value\n";
    for (NodeId v = 0; v < g.size(); ++v) os << '"' << g.label(v) << "\"," << format_number(values.at(v)) << "\n";
  }
  return os.str();
}

std::string stats_json(const EpisodeStats& s, const BiasedGraph& space, const std::string& manifest) {
  ojson j;
  j["start"] = space.label(s.start);
  j["n"] = s.n_episodes;
  j["n_terminated"] = s.n_terminated;
  j["mean"] = s.mean_payoff;
  j["se"] = s.std_error;
  j["term_rate"] = s.termination_rate;
  j["steps"] = s.mean_length;
  j["seed"] = s.rng_seed;
  j["manifest"] = manifest;
  return j.dump(2) + "\n";
}

std::string stats_csv(const std::vector<EpisodeStats>& stats, const BiasedGraph& space,
                      const std::string& manifest) {
  std::ostringstream os;
  os << "# manifest: " << manifest << "\n";
  os << "start,n,mean,se,term_rate,steps,seed\n";
  for (const auto& s : stats) {
    os << '"' << space.label(s.start) << "\"," << s.n_episodes << ',' << format_number(s.mean_payoff) << ','
       << format_number(s.std_error) << ',' << format_number(s.termination_rate) << ','
       << format_number(s.mean_length) << ',' << s.rng_seed << "\n";
  }
  return os.str();
}

std::string report_json(const std::vector<CheckResult>& results, const BiasedGraph& space,
                        const std::string& manifest) {
  ojson checks = ojson::object();
  for (const auto& r : results) {
    ojson w;
    ojson nodes = ojson::array();
    for (NodeId x : r.witness.nodes) nodes.push_back(space.label(x));
    w["nodes"] = std::move(nodes);
    w["values"] = r.witness.values;
    w["detail"] = r.witness.detail;
    ojson c;
    c["passed"] = r.passed;
    c["worst_gap"] = r.worst_gap;
    c["tolerance"] = r.tolerance_used;
    c["evaluated"] = r.evaluated;
    c["witness"] = std::move(w);
    checks[r.name] = std::move(c);
  }
  ojson j;
  j["checks"] = std::move(checks);
  j["all_passed"] = all_passed(results);
  j["manifest"] = manifest;
  return j.dump(2) + "\n";
}

std::string report_table(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-6s %14s %12s %10s\n", "check", "result", "worst_gap", "tolerance",
                "evaluated");
  os << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-18s %-6s %14.6e %12.3e %10zu\n", r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", r.worst_gap, r.tolerance_used, r.evaluated);
    os << line;
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bamle
