// Command-line front end: parses inputs, dispatches to the library, emits a
// JSON (or CSV) run report on stdout, and caches expensive search results on
// disk keyed by canonical input content.
//
// Exit codes: 0 success (certify: SOS), 1 self-test failure, 2 search
// self-check mismatch against the known table, 3 NOT_SOS, 4 INCONCLUSIVE,
// 64 usage or size-limit error, 66 unreadable or invalid input file,
// 74 output write failure.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "biqrank/io.hpp"
#include "biqrank/selftest.hpp"
#include "biqrank/version.hpp"

namespace {

using biqrank::Json;

constexpr int kExitSelfCheck = 2;
constexpr int kExitNotSos = 3;
constexpr int kExitInconclusive = 4;
constexpr int kExitUsage = 64;
constexpr int kExitBadInput = 66;
constexpr int kExitWriteFailure = 74;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct GlobalFlags {
  std::uint64_t seed = 42;
  int jobs = 1;
  std::optional<double> tol;
  std::string cache_dir;
  bool csv = false;
};

// Results of z / certify / sosrank are cached as plain JSON files named by
// the hash of (command, canonical input content, options, tool version); a
// hit replays the stored payload byte for byte along with its exit code.
struct Cache {
  std::filesystem::path dir;

  static std::string make_key(const std::string& command, const Json& canonical) {
    return command + "\n" + canonical.dump() + "\n" + biqrank::kVersion;
  }

  std::filesystem::path path_for(const std::string& key) const {
    return dir / (hex64(fnv1a64(key)) + ".json");
  }

  std::optional<std::pair<Json, int>> load(const std::string& key) const {
    try {
      const auto p = path_for(key);
      if (!std::filesystem::exists(p)) return std::nullopt;
      Json j = biqrank::load_json_file(p.string());
      if (!j.is_object() || j.value("key", "") != key) return std::nullopt;
      return std::make_pair(j.at("result"), j.at("exit_code").get<int>());
    } catch (const std::exception&) {
      return std::nullopt;  // unreadable cache entries are treated as misses
    }
  }

  void store(const std::string& key, const Json& result, int exit_code) const {
    try {
      std::filesystem::create_directories(dir);
      biqrank::save_json_file(
          path_for(key).string(),
          Json{{"key", key}, {"result", result}, {"exit_code", exit_code}});
    } catch (const std::exception& e) {
      std::fprintf(stderr, "warning: cache write failed: %s\n", e.what());
    }
  }
};

struct Report {
  std::string command;
  Json inputs = Json::object();
  Json tolerances = Json::object();
  bool csv = false;
  std::string csv_text;
  bool cached = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  int emit(const Json& result, int code) const {
    if (csv && !csv_text.empty()) {
      std::fputs(csv_text.c_str(), stdout);
      return code;
    }
    const auto elapsed = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - start);
    Json envelope{{"command", command},
                  {"inputs", inputs},
                  {"result", result},
                  {"elapsed_ms", static_cast<std::int64_t>(elapsed.count())},
                  {"tool_version", biqrank::kVersion},
                  {"tolerances", tolerances},
                  {"cached", cached}};
    std::fputs(envelope.dump(2).c_str(), stdout);
    std::fputc('\n', stdout);
    return code;
  }
};

int fail(int code, const std::string& message) {
  std::fprintf(stderr, "biqrank: %s\n", message.c_str());
  return code;
}

// ---------------------------------------------------------------------------

int cmd_z(int m, int n, int limit, bool symmetry, const GlobalFlags& flags) {
  Report report;
  report.command = "z";
  report.csv = flags.csv;
  report.inputs = Json{{"m", m}, {"n", n}, {"limit", limit},
                       {"symmetry", symmetry}, {"jobs", flags.jobs}};

  Cache cache{flags.cache_dir};
  const std::string key = Cache::make_key("z", report.inputs);

  Json result;
  int code = 0;
  if (auto hit = cache.load(key)) {
    result = hit->first;
    code = hit->second;
    report.cached = true;
  } else {
    biqrank::ZarankiewiczOptions opts;
    opts.limit = limit;
    opts.jobs = flags.jobs;
    opts.symmetry_break = symmetry;
    biqrank::ZarankiewiczResult r;
    try {
      r = biqrank::zarankiewicz(m, n, opts);
    } catch (const biqrank::SizeLimit& e) {
      return fail(kExitUsage, e.what());
    }
    const std::optional<int> known = biqrank::known_z(m, n);
    result = Json{{"z", r.z},
                  {"witness", biqrank::graph_to_json(r.witness)},
                  {"reiman_bound", biqrank::reiman_bound(m, n)},
                  {"known", known ? Json(*known) : Json(nullptr)},
                  {"nodes", r.nodes}};
    if (known && *known != r.z) {
      result["self_check"] = "mismatch against the known table";
      code = kExitSelfCheck;
    }
    cache.store(key, result, code);
  }

  if (flags.csv) {
    std::string known_text;
    if (!result["known"].is_null()) known_text = result["known"].dump();
    report.csv_text = "m,n,z,reiman_bound,known,nodes\n" + std::to_string(m) +
                      "," + std::to_string(n) + "," + result["z"].dump() + "," +
                      result["reiman_bound"].dump() + "," + known_text + "," +
                      result["nodes"].dump() + "\n";
  }
  return report.emit(result, code);
}

// ---------------------------------------------------------------------------

struct FormInput {
  biqrank::BiquadraticForm form = biqrank::make_form(1, 1, {});
  std::optional<biqrank::BipartiteGraph> graph;
  std::string source;
};

// Loads the form named by exactly one of --form/--graph/--choi. Throws
// IoError (and the library's validation errors) for bad files.
FormInput resolve_form(const std::string& form_path, const std::string& graph_path,
                       const std::string& choi) {
  FormInput in;
  if (!form_path.empty()) {
    in.form = biqrank::load_form(form_path);
    in.source = form_path;
  } else if (!graph_path.empty()) {
    in.graph = biqrank::load_graph(graph_path);
    in.form = biqrank::simple_form_from_graph(*in.graph);
    in.source = graph_path;
  } else {
    in.form = biqrank::choi_form(choi == "classical"
                                     ? biqrank::ChoiVariant::kClassical
                                     : biqrank::ChoiVariant::kPrinted);
    in.source = "choi:" + choi;
  }
  return in;
}

int certify_exit_code(biqrank::SosStatus status) {
  switch (status) {
    case biqrank::SosStatus::kSos: return 0;
    case biqrank::SosStatus::kNotSos: return kExitNotSos;
    case biqrank::SosStatus::kInconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

int cmd_certify(const std::string& form_path, const std::string& graph_path,
                const std::string& choi, const GlobalFlags& flags) {
  Report report;
  report.command = "certify";
  report.csv = flags.csv;

  FormInput in;
  try {
    in = resolve_form(form_path, graph_path, choi);
  } catch (const biqrank::Error& e) {
    return fail(kExitBadInput, e.what());
  }

  biqrank::CertifyOptions opts;
  opts.seed = flags.seed;
  if (flags.tol) opts.cert_tol = *flags.tol;
  report.inputs = Json{{"source", in.source}, {"m", in.form.m()},
                       {"n", in.form.n()}, {"seed", opts.seed}};
  report.tolerances = Json{{"cert_tol", opts.cert_tol},
                           {"cert_margin", opts.cert_margin}};

  Cache cache{flags.cache_dir};
  const Json canonical{{"form", biqrank::form_to_json(in.form)},
                       {"seed", opts.seed},
                       {"cert_tol", opts.cert_tol},
                       {"cert_margin", opts.cert_margin},
                       {"max_iterations", opts.max_iterations},
                       {"restarts", opts.restarts}};
  const std::string key = Cache::make_key("certify", canonical);

  Json result;
  int code = 0;
  if (auto hit = cache.load(key)) {
    result = hit->first;
    code = hit->second;
    report.cached = true;
  } else {
    biqrank::SosCertificate cert = biqrank::certify_sos(in.form, opts);
    result = biqrank::certificate_to_json(cert, opts);
    code = certify_exit_code(cert.status);
    cache.store(key, result, code);
  }

  if (flags.csv) {
    report.csv_text = "status,lambda_star,iterations,restarts_used,stalled\n" +
                      result["status"].get<std::string>() + "," +
                      result["lambda_star"].dump() + "," +
                      result["iterations"].dump() + "," +
                      result["restarts_used"].dump() + "," +
                      result["stalled"].dump() + "\n";
  }
  return report.emit(result, code);
}

int cmd_sosrank(const std::string& form_path, const std::string& graph_path,
                const std::string& choi, int rmin, std::optional<int> rmax,
                const GlobalFlags& flags) {
  Report report;
  report.command = "sosrank";
  report.csv = flags.csv;

  FormInput in;
  try {
    in = resolve_form(form_path, graph_path, choi);
  } catch (const biqrank::Error& e) {
    return fail(kExitBadInput, e.what());
  }

  biqrank::RankSearchOptions opts;
  opts.seed = flags.seed;
  opts.certify.seed = flags.seed;
  if (flags.tol) opts.conv_tol = *flags.tol;
  const int upper = rmax.value_or(in.form.m() * in.form.n());

  report.inputs = Json{{"source", in.source}, {"m", in.form.m()},
                       {"n", in.form.n()}, {"rank_min", rmin},
                       {"rank_max", upper}, {"seed", opts.seed}};
  report.tolerances = Json{{"conv_tol", opts.conv_tol},
                           {"rank_tol", opts.rank_tol},
                           {"cert_tol", opts.certify.cert_tol},
                           {"cert_margin", opts.certify.cert_margin}};

  Cache cache{flags.cache_dir};
  const Json canonical{{"form", biqrank::form_to_json(in.form)},
                       {"rank_min", rmin},
                       {"rank_max", upper},
                       {"seed", opts.seed},
                       {"conv_tol", opts.conv_tol},
                       {"rank_tol", opts.rank_tol},
                       {"max_iterations", opts.max_iterations},
                       {"restarts", opts.restarts}};
  const std::string key = Cache::make_key("sosrank", canonical);

  Json result;
  int code = 0;
  if (auto hit = cache.load(key)) {
    result = hit->first;
    code = hit->second;
    report.cached = true;
  } else {
    // Certify up front so a non-SOS input yields its certificate as the
    // explanation instead of a bare error.
    biqrank::SosCertificate cert = biqrank::certify_sos(in.form, opts.certify);
    if (cert.status != biqrank::SosStatus::kSos) {
      result = biqrank::certificate_to_json(cert, opts.certify);
      result["error"] = "form is not certified SOS; rank search skipped";
      code = certify_exit_code(cert.status);
    } else {
      biqrank::RankSearchResult r;
      try {
        r = biqrank::sos_rank_search(in.form, rmin, upper, opts);
      } catch (const biqrank::InvalidRank& e) {
        return fail(kExitUsage, e.what());
      }
      result = biqrank::rank_result_to_json(r, opts);
      result["exact"] = r.converged && r.rank_lower.has_value() &&
                        r.rank_upper.has_value() && *r.rank_lower == *r.rank_upper;
      if (in.graph)
        result["edges"] = static_cast<int>(in.graph->edges.size());
      code = 0;
    }
    cache.store(key, result, code);
  }

  if (flags.csv) {
    const auto field = [&result](const char* name) -> std::string {
      return result.contains(name) && !result[name].is_null() ? result[name].dump()
                                                              : std::string();
    };
    std::string residual;
    if (result.contains("decomposition") && result["decomposition"].is_object())
      residual = result["decomposition"]["residual"].dump();
    report.csv_text =
        "status,lambda_star,rank_lower,rank_upper,residual,exact\n" +
        result["status"].get<std::string>() + "," + result["lambda_star"].dump() +
        "," + field("rank_lower") + "," + field("rank_upper") + "," + residual +
        "," + field("exact") + "\n";
  }
  return report.emit(result, code);
}

// ---------------------------------------------------------------------------

int cmd_graph_form(const std::string& graph_path, const std::string& out_path,
                   const GlobalFlags& flags) {
  Report report;
  report.command = "graph-form";
  report.csv = flags.csv;
  report.inputs = Json{{"graph", graph_path}, {"out", out_path}};

  biqrank::BipartiteGraph g;
  try {
    g = biqrank::load_graph(graph_path);
  } catch (const biqrank::Error& e) {
    return fail(kExitBadInput, e.what());
  }
  biqrank::BiquadraticForm p = biqrank::simple_form_from_graph(g);
  try {
    biqrank::save_json_file(out_path, biqrank::form_to_json(p));
  } catch (const biqrank::Error& e) {
    return fail(kExitWriteFailure, e.what());
  }

  const Json result{{"m", g.m}, {"n", g.n},
                    {"edges", static_cast<int>(g.edges.size())},
                    {"entries", static_cast<int>(p.coefficients().size())},
                    {"out", out_path}};
  if (flags.csv)
    report.csv_text = "m,n,edges,out\n" + std::to_string(g.m) + "," +
                      std::to_string(g.n) + "," +
                      std::to_string(g.edges.size()) + "," +
                      csv_escape(out_path) + "\n";
  return report.emit(result, 0);
}

int cmd_selftest(bool skip_extended, std::optional<int> only,
                 const GlobalFlags& flags) {
  Report report;
  report.command = "selftest";
  report.csv = flags.csv;

  biqrank::SelftestOptions opts;
  opts.extended = !skip_extended;
  opts.only = only;
  opts.jobs = flags.jobs;
  opts.seed = flags.seed;
  if (flags.tol) {
    opts.residual_tol = *flags.tol;
    opts.identity_tol = *flags.tol;
  }
  report.inputs = Json{{"extended", opts.extended},
                       {"only", only ? Json(*only) : Json(nullptr)},
                       {"jobs", opts.jobs}, {"seed", opts.seed}};
  report.tolerances = Json{{"residual_tol", opts.residual_tol},
                           {"identity_tol", opts.identity_tol}};

  const std::vector<biqrank::CriterionResult> results = biqrank::run_selftest(opts);
  bool all_passed = true;
  Json criteria = Json::array();
  std::string csv = "id,name,passed,skipped,elapsed_ms,detail\n";
  for (const biqrank::CriterionResult& r : results) {
    criteria.push_back(Json{{"id", r.id}, {"name", r.name},
                            {"passed", r.passed}, {"skipped", r.skipped},
                            {"elapsed_ms", static_cast<std::int64_t>(r.elapsed_ms)},
                            {"detail", r.detail}});
    if (!r.skipped && !r.passed) all_passed = false;
    csv += std::to_string(r.id) + "," + csv_escape(r.name) + "," +
           (r.passed ? "true" : "false") + "," + (r.skipped ? "true" : "false") +
           "," + std::to_string(static_cast<std::int64_t>(r.elapsed_ms)) + "," +
           csv_escape(r.detail) + "\n";
  }
  if (flags.csv) report.csv_text = csv;
  return report.emit(Json{{"criteria", criteria}, {"all_passed", all_passed}},
                     all_passed ? 0 : 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sum-of-squares certification, SOS rank search, and "
               "quadrilateral-free bipartite search"};
  app.require_subcommand(1);

  GlobalFlags flags;
  const char* env_cache = std::getenv("BIQRANK_CACHE_DIR");
  flags.cache_dir = env_cache ? env_cache : ".biqrank-cache";
  double tol_value = 0.0;
  app.add_option("--seed", flags.seed, "seed for randomized procedures")
      ->capture_default_str();
  app.add_option("--jobs", flags.jobs, "worker threads for the graph search")
      ->check(CLI::Range(1, 256))->capture_default_str();
  CLI::Option* tol_opt =
      app.add_option("--tol", tol_value,
                     "override the primary tolerance of the command");
  app.add_option("--cache-dir", flags.cache_dir,
                 "result cache directory (also via BIQRANK_CACHE_DIR)")
      ->capture_default_str();
  bool json_flag = false;
  app.add_flag("--json", json_flag, "emit a JSON run report (default)");
  app.add_flag("--csv", flags.csv, "emit CSV instead of JSON");

  int z_m = 0, z_n = 0, z_limit = 7;
  bool z_symmetry = false;
  CLI::App* sub_z = app.add_subcommand("z", "maximum edges of a C4-free bipartite graph");
  sub_z->fallthrough();
  sub_z->add_option("m", z_m, "left side")->required();
  sub_z->add_option("n", z_n, "right side")->required();
  sub_z->add_option("--limit", z_limit, "maximum accepted side length")
      ->check(CLI::Range(1, 8))->capture_default_str();
  sub_z->add_flag("--symmetry", z_symmetry, "restrict to non-increasing left degrees");

  std::string certify_form, certify_graph, certify_choi;
  CLI::App* sub_certify = app.add_subcommand("certify", "decide whether a form is a sum of squares");
  sub_certify->fallthrough();
  CLI::Option* c_form = sub_certify->add_option("--form", certify_form, "form JSON file");
  CLI::Option* c_graph = sub_certify->add_option("--graph", certify_graph, "graph JSON file (uses its square form)");
  CLI::Option* c_choi = sub_certify->add_option("--choi", certify_choi, "built-in 3x3 form")
      ->check(CLI::IsMember({"classical", "printed"}));
  c_form->excludes(c_graph)->excludes(c_choi);
  c_graph->excludes(c_choi);

  std::string rank_form, rank_graph, rank_choi;
  int rank_min = 0;
  int rank_max = -1;
  CLI::App* sub_rank = app.add_subcommand("sosrank", "bracket the minimum number of squares");
  sub_rank->fallthrough();
  CLI::Option* r_form = sub_rank->add_option("--form", rank_form, "form JSON file");
  CLI::Option* r_graph = sub_rank->add_option("--graph", rank_graph, "graph JSON file (uses its square form)");
  CLI::Option* r_choi = sub_rank->add_option("--choi", rank_choi, "built-in 3x3 form")
      ->check(CLI::IsMember({"classical", "printed"}));
  r_form->excludes(r_graph)->excludes(r_choi);
  r_graph->excludes(r_choi);
  sub_rank->add_option("--rmin", rank_min, "smallest rank cap to try")->capture_default_str();
  sub_rank->add_option("--rmax", rank_max, "largest rank cap to try (default m*n)");

  std::string gf_graph, gf_out;
  CLI::App* sub_gf = app.add_subcommand("graph-form", "write the square form of a graph");
  sub_gf->fallthrough();
  sub_gf->add_option("graph", gf_graph, "graph JSON file")->required();
  sub_gf->add_option("out", gf_out, "output form JSON file")->required();

  bool st_skip_extended = false;
  int st_only = 0;
  CLI::App* sub_st = app.add_subcommand("selftest", "run the acceptance criteria");
  sub_st->fallthrough();
  sub_st->add_flag("--skip-extended", st_skip_extended, "skip the exhaustive 6x4 criterion");
  CLI::Option* st_only_opt = sub_st->add_option("--only", st_only, "run a single criterion by id")
      ->check(CLI::Range(1, 10));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (*tol_opt) flags.tol = tol_value;

  try {
    if (sub_z->parsed()) return cmd_z(z_m, z_n, z_limit, z_symmetry, flags);
    if (sub_certify->parsed()) {
      if (certify_form.empty() && certify_graph.empty() && certify_choi.empty())
        return fail(kExitUsage, "certify needs one of --form, --graph, --choi");
      return cmd_certify(certify_form, certify_graph, certify_choi, flags);
    }
    if (sub_rank->parsed()) {
      if (rank_form.empty() && rank_graph.empty() && rank_choi.empty())
        return fail(kExitUsage, "sosrank needs one of --form, --graph, --choi");
      std::optional<int> rmax;
      if (rank_max >= 0) rmax = rank_max;
      return cmd_sosrank(rank_form, rank_graph, rank_choi, rank_min, rmax, flags);
    }
    if (sub_gf->parsed()) return cmd_graph_form(gf_graph, gf_out, flags);
    if (sub_st->parsed()) {
      std::optional<int> only;
      if (*st_only_opt) only = st_only;
      return cmd_selftest(st_skip_extended, only, flags);
    }
  } catch (const biqrank::SizeLimit& e) {
    return fail(kExitUsage, e.what());
  } catch (const biqrank::Error& e) {
    return fail(kExitBadInput, e.what());
  }
  return fail(kExitUsage, "no command given");
}
