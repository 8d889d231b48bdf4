#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "biqrank/io.hpp"

using namespace biqrank;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("form json round trip") {
  BiquadraticForm p = choi_form(ChoiVariant::kClassical);
  BiquadraticForm q = form_from_json(form_to_json(p));
  REQUIRE(q.m() == p.m());
  REQUIRE(q.n() == p.n());
  REQUIRE(q.coefficients() == p.coefficients());
}

TEST_CASE("form entries naming one orbit are summed") {
  Json j{{"m", 2},
         {"n", 2},
         {"entries", Json::array({Json::array({1, 1, 2, 2, 0.5}),
                                  Json::array({2, 2, 1, 1, 0.25}),
                                  Json::array({1, 2, 1, 2, 1.0})})}};
  BiquadraticForm p = form_from_json(j);
  // (1,1,2,2) and (2,2,1,1) are the same symmetry orbit.
  REQUIRE(p.coefficient(1, 1, 2, 2) == Catch::Approx(0.75));
  REQUIRE(p.coefficient(1, 2, 1, 2) == 1.0);
  REQUIRE(p.coefficients().size() == 2);
}

TEST_CASE("malformed form json is rejected") {
  REQUIRE_THROWS_AS(form_from_json(Json{{"m", 2}, {"entries", Json::array()}}),
                    IoError);
  REQUIRE_THROWS_AS(form_from_json(Json{{"m", 2}, {"n", 2}, {"entries", 5}}),
                    IoError);
  REQUIRE_THROWS_AS(
      form_from_json(Json{{"m", 2}, {"n", 2},
                          {"entries", Json::array({Json::array({1, 1, 1, 1})})}}),
      IoError);
  REQUIRE_THROWS_AS(
      form_from_json(Json{{"m", 2.5}, {"n", 2}, {"entries", Json::array()}}),
      IoError);
  // Range validation comes from the form itself.
  REQUIRE_THROWS_AS(
      form_from_json(Json{{"m", 2}, {"n", 2},
                          {"entries",
                           Json::array({Json::array({3, 1, 1, 1, 1.0})})}}),
      InvalidIndex);
}

TEST_CASE("graph json round trip") {
  BipartiteGraph g = max_c4free_graph_4x3();
  BipartiteGraph h = graph_from_json(graph_to_json(g));
  REQUIRE(h.m == g.m);
  REQUIRE(h.n == g.n);
  REQUIRE(h.edges == g.edges);

  REQUIRE_THROWS_AS(graph_from_json(Json{{"m", 2}, {"n", 2}}), IoError);
  REQUIRE_THROWS_AS(
      graph_from_json(Json{{"m", 2}, {"n", 2},
                           {"edges", Json::array({Json::array({1})})}}),
      IoError);
  REQUIRE_THROWS_AS(
      graph_from_json(Json{{"m", 2}, {"n", 2},
                           {"edges", Json::array({Json::array({1, 3})})}}),
      InvalidIndex);
}

TEST_CASE("decomposition json lists terms as coefficient matrices") {
  SosDecomposition d = identity_decomposition(max_c4free_graph_4x3());
  Json j = decomposition_to_json(d);
  REQUIRE(j["terms"].size() == 7);
  REQUIRE(j["terms"][0].size() == 4);     // m rows
  REQUIRE(j["terms"][0][0].size() == 3);  // n columns
  REQUIRE(j["residual"] == 0.0);

  SosDecomposition back = decomposition_from_json(j);
  REQUIRE(back.m == d.m);
  REQUIRE(back.n == d.n);
  REQUIRE(back.terms == d.terms);

  Json bad = j;
  bad["terms"][0] = Json::array({Json::array({1.0, 2.0, 3.0})});
  REQUIRE_THROWS_AS(decomposition_from_json(bad), IoError);
}

TEST_CASE("certificate json carries status and null rank fields") {
  CertifyOptions opts;
  SosCertificate cert = certify_sos(
      make_form(2, 2, {{1, 1, 1, 1, 1.0}, {2, 2, 2, 2, 1.0}}), opts);
  Json j = certificate_to_json(cert, opts);
  REQUIRE(j["status"] == "SOS");
  REQUIRE(j["rank_upper"].is_null());
  REQUIRE(j["rank_lower"].is_null());
  REQUIRE(j["decomposition"].is_null());
  REQUIRE(j["tolerances"]["cert_tol"] == opts.cert_tol);
  REQUIRE(j["gamma"].size() == 1);
  // Round trip through text parses to the same document.
  REQUIRE(Json::parse(j.dump()) == j);
}

TEST_CASE("rank search json includes decomposition and probes") {
  BipartiteGraph k22 = make_graph(2, 2, {{1, 1}, {1, 2}, {2, 1}, {2, 2}});
  RankSearchOptions opts;
  RankSearchResult r = sos_rank_search(simple_form_from_graph(k22), 1, 4, opts);
  Json j = rank_result_to_json(r, opts);
  REQUIRE(j["status"] == "SOS");
  REQUIRE(j["rank_upper"] == 2);
  REQUIRE(j["rank_lower"].is_null());
  REQUIRE(j["converged"] == true);
  REQUIRE(j["decomposition"].is_object());
  REQUIRE(j["decomposition"]["terms"].size() == 2);
  REQUIRE(j["probes"].size() >= 2);
  REQUIRE(j["probes"][0]["cap"] == 1);
  REQUIRE(j["probes"][0]["converged"] == false);
  SosDecomposition back = decomposition_from_json(j["decomposition"]);
  REQUIRE(verify_decomposition(simple_form_from_graph(k22), back) <= 1e-8);
}

TEST_CASE("json files save and load") {
  const auto path = temp_file("biqrank_io_test.json");
  std::filesystem::remove(path);
  BipartiteGraph g = make_graph(2, 3, {{1, 1}, {2, 2}});
  save_json_file(path.string(), graph_to_json(g));
  BipartiteGraph h = load_graph(path.string());
  REQUIRE(h.edges == g.edges);
  std::filesystem::remove(path);

  REQUIRE_THROWS_AS(load_json_file(path.string()), IoError);
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  REQUIRE_THROWS_AS(load_json_file(path.string()), IoError);
  std::filesystem::remove(path);
}
