#pragma once
// JSON file formats: forms, bipartite graphs, decompositions, certificates.
//
// Forms are stored as {"m", "n", "entries": [[i,j,k,l,value], ...]} with
// 1-based indices; entries naming the same symmetry orbit are summed on load.
// Graphs are {"m", "n", "edges": [[i,j], ...]}. Decompositions list each
// bilinear term as an m x n coefficient matrix. Malformed input raises
// IoError; out-of-range indices surface the library's own validation errors.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "biqrank/errors.hpp"
#include "biqrank/forms.hpp"
#include "biqrank/gram.hpp"
#include "biqrank/graphs.hpp"
#include "biqrank/sosrank.hpp"

namespace biqrank {

using Json = nlohmann::json;

namespace detail {

inline int json_int(const Json& j, const char* what) {
  if (!j.is_number_integer())
    throw IoError(std::string("expected an integer for ") + what);
  return j.get<int>();
}

inline double json_real(const Json& j, const char* what) {
  if (!j.is_number())
    throw IoError(std::string("expected a number for ") + what);
  return j.get<double>();
}

inline const Json& json_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw IoError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

}  // namespace detail

inline Json form_to_json(const BiquadraticForm& p) {
  Json entries = Json::array();
  for (const auto& [t, a] : p.coefficients())
    entries.push_back(Json::array({t[0], t[1], t[2], t[3], a}));
  return Json{{"m", p.m()}, {"n", p.n()}, {"entries", std::move(entries)}};
}

inline BiquadraticForm form_from_json(const Json& j) {
  const int m = detail::json_int(detail::json_field(j, "m"), "m");
  const int n = detail::json_int(detail::json_field(j, "n"), "n");
  const Json& entries = detail::json_field(j, "entries");
  if (!entries.is_array()) throw IoError("\"entries\" must be an array");
  std::vector<FormEntry> parsed;
  parsed.reserve(entries.size());
  for (const Json& e : entries) {
    if (!e.is_array() || e.size() != 5)
      throw IoError("each entry must be [i, j, k, l, value]");
    parsed.push_back({detail::json_int(e[0], "entry index i"),
                      detail::json_int(e[1], "entry index j"),
                      detail::json_int(e[2], "entry index k"),
                      detail::json_int(e[3], "entry index l"),
                      detail::json_real(e[4], "entry value")});
  }
  return make_form(m, n, parsed);
}

inline Json graph_to_json(const BipartiteGraph& g) {
  Json edges = Json::array();
  for (const auto& [i, j] : g.edges) edges.push_back(Json::array({i, j}));
  return Json{{"m", g.m}, {"n", g.n}, {"edges", std::move(edges)}};
}

inline BipartiteGraph graph_from_json(const Json& j) {
  const int m = detail::json_int(detail::json_field(j, "m"), "m");
  const int n = detail::json_int(detail::json_field(j, "n"), "n");
  const Json& edges = detail::json_field(j, "edges");
  if (!edges.is_array()) throw IoError("\"edges\" must be an array");
  std::vector<std::pair<int, int>> parsed;
  parsed.reserve(edges.size());
  for (const Json& e : edges) {
    if (!e.is_array() || e.size() != 2)
      throw IoError("each edge must be [i, j]");
    parsed.emplace_back(detail::json_int(e[0], "edge endpoint i"),
                        detail::json_int(e[1], "edge endpoint j"));
  }
  return make_graph(m, n, std::move(parsed));
}

// Terms are written as m x n coefficient matrices: term[i-1][j-1] multiplies
// x_i y_j in the squared bilinear form.
inline Json decomposition_to_json(const SosDecomposition& d) {
  Json terms = Json::array();
  for (const std::vector<double>& t : d.terms) {
    Json rows = Json::array();
    for (int i = 1; i <= d.m; ++i) {
      Json row = Json::array();
      for (int j = 1; j <= d.n; ++j)
        row.push_back(t[static_cast<std::size_t>(kron_index(i, j, d.n))]);
      rows.push_back(std::move(row));
    }
    terms.push_back(std::move(rows));
  }
  return Json{{"m", d.m}, {"n", d.n}, {"terms", std::move(terms)},
              {"residual", d.residual}};
}

inline SosDecomposition decomposition_from_json(const Json& j) {
  SosDecomposition d;
  d.m = detail::json_int(detail::json_field(j, "m"), "m");
  d.n = detail::json_int(detail::json_field(j, "n"), "n");
  if (d.m < 1 || d.n < 1) throw IoError("decomposition sides must be positive");
  d.residual = detail::json_real(detail::json_field(j, "residual"), "residual");
  const Json& terms = detail::json_field(j, "terms");
  if (!terms.is_array()) throw IoError("\"terms\" must be an array");
  for (const Json& rows : terms) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != d.m)
      throw IoError("each term must have m rows");
    std::vector<double> flat(static_cast<std::size_t>(d.m) * d.n);
    for (int i = 1; i <= d.m; ++i) {
      const Json& row = rows[static_cast<std::size_t>(i - 1)];
      if (!row.is_array() || static_cast<int>(row.size()) != d.n)
        throw IoError("each term row must have n entries");
      for (int j2 = 1; j2 <= d.n; ++j2)
        flat[static_cast<std::size_t>(kron_index(i, j2, d.n))] =
            detail::json_real(row[static_cast<std::size_t>(j2 - 1)], "term coefficient");
    }
    d.terms.push_back(std::move(flat));
  }
  return d;
}

// Certificate payload; rank bounds and the decomposition stay null unless a
// rank search result is folded in via rank_result_to_json.
inline Json certificate_to_json(const SosCertificate& cert,
                                const CertifyOptions& opts) {
  Json gamma = Json::array();
  for (double g : cert.gamma) gamma.push_back(g);
  return Json{{"status", to_string(cert.status)},
              {"lambda_star", cert.lambda_star},
              {"gamma", std::move(gamma)},
              {"iterations", cert.iterations},
              {"restarts_used", cert.restarts_used},
              {"stalled", cert.stalled},
              {"rank_upper", nullptr},
              {"rank_lower", nullptr},
              {"decomposition", nullptr},
              {"tolerances",
               Json{{"cert_tol", opts.cert_tol}, {"cert_margin", opts.cert_margin}}}};
}

inline Json rank_result_to_json(const RankSearchResult& res,
                                const RankSearchOptions& opts) {
  Json out = certificate_to_json(res.certificate, opts.certify);
  out["tolerances"]["conv_tol"] = opts.conv_tol;
  out["tolerances"]["rank_tol"] = opts.rank_tol;
  out["converged"] = res.converged;
  out["iterations"] = res.iterations;
  if (res.rank_upper) out["rank_upper"] = *res.rank_upper;
  if (res.rank_lower) out["rank_lower"] = *res.rank_lower;
  if (res.converged) out["decomposition"] = decomposition_to_json(res.decomposition);
  Json probes = Json::array();
  for (const RankProbe& p : res.probes)
    probes.push_back(Json{{"cap", p.cap},
                          {"converged", p.converged},
                          {"best_gap", p.best_gap},
                          {"restarts_used", p.restarts_used},
                          {"iterations", p.iterations}});
  out["probes"] = std::move(probes);
  return out;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  Json j = Json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw IoError("invalid JSON in " + path);
  return j;
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("cannot write " + path);
}

inline BiquadraticForm load_form(const std::string& path) {
  return form_from_json(load_json_file(path));
}

inline BipartiteGraph load_graph(const std::string& path) {
  return graph_from_json(load_json_file(path));
}

}  // namespace biqrank
