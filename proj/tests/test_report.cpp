#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "rigidlab/errors.hpp"
#include "rigidlab/report.hpp"

using namespace rigidlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("sequence specs build the matching generators") {
  auto seq = [](const char* text) {
    return sequence_from_json(Json::parse(text));
  };
  CHECK((seq(R"({"kind":"powers","base":2})").term(3) == 8));
  CHECK((seq(R"({"kind":"powers","base":"10"})").term(2) == 100));
  IntSequence r = seq(R"({"kind":"ratios","ratios":[2,3],"extend":"cycle"})");
  CHECK((r.term(1) == 2));
  CHECK((r.term(2) == 6));
  CHECK((r.term(3) == 12));
  CHECK((seq(R"({"kind":"polynomial","coeffs":[0,0,1]})").term(5) == 25));
  CHECK((seq(R"({"kind":"perturbed_powers","base":2,"coeffs":[0,1]})").term(4) ==
         20));
  IntSequence cf =
      seq(R"({"kind":"continued_fraction","quotients":[1],"extend":"repeat"})");
  CHECK((cf.term(1) == 1));
  CHECK((cf.term(5) == 5));
  CHECK((seq(R"({"kind":"chacon"})").term(1) == 3));
  CHECK((seq(R"({"kind":"explicit","terms":[4,7]})").term(2) == 7));
  CHECK((seq(R"({"kind":"shifted","of":{"kind":"powers","base":2},"offset":1})")
             .term(3) == 9));
  IntSequence u = seq(
      R"({"kind":"union","parts":[{"kind":"powers","base":2},
          {"kind":"shifted","of":{"kind":"powers","base":2},"offset":1}]})");
  CHECK((u.term(1) == 2));
  CHECK((u.term(2) == 3));
  CHECK((u.term(4) == 5));
  CHECK((seq(R"({"kind":"recurrence","coeffs":[1,1],"init":[1,2]})").term(5) ==
         8));

  CHECK_THROWS_AS(seq(R"({"kind":"mystery"})"), ConfigError);
  CHECK_THROWS_AS(seq(R"({"base":2})"), ConfigError);
  CHECK_THROWS_AS(seq(R"({"kind":"powers"})"), ConfigError);
  CHECK_THROWS_AS(seq(R"({"kind":"shifted","offset":1})"), ConfigError);
  CHECK_THROWS_AS(seq(R"([1,2,3])"), ConfigError);
  CHECK_THROWS_AS(seq(R"({"kind":"ratios","ratios":[2],"extend":"mirror"})"),
                  ConfigError);
}

TEST_CASE("measure specs build the matching families") {
  auto meas = [](const char* text) {
    return measure_from_json(Json::parse(text));
  };
  CircleMeasure a =
      meas(R"({"kind":"atomic","atoms":[["0","1/2"],["1/2","1/2"]]})");
  CHECK(std::holds_alternative<AtomicMeasure>(a));
  CHECK(fourier(a, Int(2), 32).value.re.contains(Rat(1)));

  CircleMeasure rg = meas(R"({"kind":"riesz","ratio":3})");
  const RieszProduct* rp = std::get_if<RieszProduct>(&rg);
  REQUIRE((rp != nullptr));
  CHECK((rp->positions == RieszProduct::Positions::geometric));
  CHECK((rp->x(1) == Rat(1, 3)));
  CHECK((rp->b(2) == Rat(1, 3)));

  CircleMeasure rl = meas(R"({"kind":"riesz","xs":["1/4"],"bs":["1/2"]})");
  const RieszProduct* lp = std::get_if<RieszProduct>(&rl);
  REQUIRE((lp != nullptr));
  CHECK((lp->positions == RieszProduct::Positions::listed));
  CHECK((lp->weights == RieszProduct::Weights::listed));
  CHECK((lp->x(1) == Rat(1, 4)));
  CHECK((lp->b(1) == Rat(1, 2)));

  CircleMeasure b = meas(
      R"({"kind":"block","radixes":[2],"block_lengths":"triangular","eps":"harmonic"})");
  const BlockDigitMeasure* bp = std::get_if<BlockDigitMeasure>(&b);
  REQUIRE((bp != nullptr));
  CHECK((bp->N(2) == 3));
  CHECK((bp->eps(1) == Rat(1, 3)));

  CircleMeasure bl = meas(
      R"({"kind":"block","radixes":[2,3],"extend":"cycle",
          "block_lengths":[2,5],"eps":["1/4"]})");
  const BlockDigitMeasure* lq = std::get_if<BlockDigitMeasure>(&bl);
  REQUIRE((lq != nullptr));
  CHECK((lq->block_len(0) == 2));
  CHECK((lq->block_len(1) == 5));
  CHECK((lq->block_len(2) == 6));
  CHECK((lq->eps(3) == Rat(1, 4)));
  CHECK((lq->radix(3) == 2));

  CircleMeasure c = meas(
      R"({"kind":"cantor","sequence":{"kind":"ratios","ratios":[32]},
          "shrink":"linear","depth":3,"start":1})");
  const CantorArcMeasure* cp = std::get_if<CantorArcMeasure>(&c);
  REQUIRE((cp != nullptr));
  CHECK((cp->levels.size() == 3));
  CHECK((cp->levels[0].n == 32));
  CHECK((cp->levels[0].h == 1));

  CHECK_THROWS_AS(meas(R"({"kind":"dust"})"), ConfigError);
  CHECK_THROWS_AS(meas(R"({"kind":"atomic","atoms":[[0]]})"), ConfigError);
  CHECK_THROWS_AS(meas(R"({"kind":"atomic"})"), ConfigError);
  CHECK_THROWS_AS(
      meas(R"({"kind":"cantor","sequence":{"kind":"powers","base":2},
               "shrink":"cubic","depth":2})"),
      ConfigError);
  CHECK_THROWS_AS(meas(R"("atomic")"), ConfigError);
}

TEST_CASE("value serialization uses decimal and p/q strings") {
  CHECK((j_int(Int(-5)) == Json("-5")));
  CHECK((j_int(Int(0)) == Json("0")));
  CHECK((j_rat(Rat(2, 6)) == Json("1/3")));
  CHECK((j_rat(Rat(4, 2)) == Json("2")));
  Json iv = j_iv(RatIv(Rat(1, 3), Rat(1, 2)));
  CHECK((iv["lo"] == "1/3"));
  CHECK((iv["hi"] == "1/2"));
  Json cx = j_cx(CxIv(RatIv(Rat(1)), RatIv(Rat(-1, 4))));
  CHECK((cx["re"]["lo"] == "1"));
  CHECK((cx["im"]["hi"] == "-1/4"));
}

TEST_CASE("config parsing rejects malformed documents") {
  CHECK_THROWS_WITH_AS(AnalysisConfig::from_string("{oops"),
                       doctest::Contains("not valid JSON"), ConfigError);
  CHECK_THROWS_WITH_AS(AnalysisConfig::from_file("/nonexistent/cfg.json"),
                       doctest::Contains("cannot open"), ConfigError);
  CHECK_THROWS_AS(run(AnalysisConfig::from_string("[1,2]")), ConfigError);
  CHECK_THROWS_AS(run(AnalysisConfig::from_string(R"({"precision_bits":8})")),
                  ConfigError);
  CHECK_THROWS_AS(run(AnalysisConfig::from_string(R"({"horizon":0})")),
                  ConfigError);
  CHECK_THROWS_AS(run(AnalysisConfig::from_string(R"({"tolerance":"0"})")),
                  ConfigError);
  CHECK_THROWS_AS(run(AnalysisConfig::from_string(R"({"analyses":{}})")),
                  ConfigError);
  CHECK_THROWS_AS(
      run(AnalysisConfig::from_string(
          R"({"analyses":[{"name":"a","kind":"seq.terms"},
              {"name":"a","kind":"seq.terms"}]})")),
      ConfigError);
}

TEST_CASE("a run returns one result per analysis") {
  AnalysisConfig cfg = AnalysisConfig::from_string(R"({
    "sequence": {"kind": "powers", "base": 2},
    "analyses": [
      {"name": "terms-a", "kind": "seq.terms", "hi": 4},
      {"name": "gaps-b", "kind": "obstruct.gaps", "window": 10}
    ]
  })");
  Report rep = run(cfg);
  REQUIRE((rep.results.size() == 2));
  // sorted by name
  CHECK((rep.results[0].key == "gaps-b"));
  CHECK((rep.results[1].key == "terms-a"));
  CHECK(rep.results[0].ok);
  CHECK(rep.results[1].ok);
  CHECK((rep.results[1].check == "term-enumeration"));
  const Json& rows = rep.results[1].data.at("rows");
  REQUIRE((rows.size() == 4));
  CHECK((rows[2]["m"] == 3));
  CHECK((rows[2]["n"] == "8"));
  CHECK((rep.timings.size() == 2));
  CHECK((rep.wall_seconds >= 0));

  // no analyses at all is a valid (empty) run
  Report empty = run(AnalysisConfig::from_string("{}"));
  CHECK(empty.results.empty());
}

TEST_CASE("per-analysis failures are recorded, not fatal") {
  AnalysisConfig cfg = AnalysisConfig::from_string(R"({
    "analyses": [
      {"name": "bad-kind", "kind": "seq.mystery"},
      {"name": "no-seq", "kind": "seq.terms"},
      {"name": "past-end", "kind": "seq.terms",
       "sequence": {"kind": "explicit", "terms": [3]}, "hi": 5},
      {"name": "fine", "kind": "seq.terms",
       "sequence": {"kind": "powers", "base": 3}, "hi": 2}
    ]
  })");
  Report rep = run(cfg);
  REQUIRE((rep.results.size() == 4));
  CHECK((rep.results[0].key == "bad-kind"));
  CHECK(!rep.results[0].ok);
  CHECK((rep.results[0].error.find("unknown analysis kind") != std::string::npos));
  CHECK((rep.results[0].check == "seq.mystery"));
  CHECK(rep.results[1].ok);  // "fine"
  CHECK(!rep.results[2].ok);
  CHECK((rep.results[2].error.find("no sequence") != std::string::npos));
  CHECK(!rep.results[3].ok);
  CHECK((rep.results[3].error.find("budget") != std::string::npos));
}

TEST_CASE("reports serialize to identical bytes across runs") {
  const char* text = R"({
    "seed": 5,
    "precision_bits": 64,
    "sequence": {"kind": "powers", "base": 2},
    "analyses": [
      {"name": "prof", "kind": "measure.gap_profile",
       "measure": {"kind": "riesz"}, "m_lo": 2, "m_hi": 6},
      {"name": "conv", "kind": "rotation.convergents", "golden": true,
       "count": 6},
      {"name": "cyl", "kind": "odometer.cylinder", "radixes": [2, 3],
       "r": 5},
      {"name": "word", "kind": "rankone.chacon_word", "k": 4},
      {"name": "weyl", "kind": "obstruct.weyl", "horizon": 64, "samples": 4}
    ]
  })";
  Report r1 = run(AnalysisConfig::from_string(text));
  Report r2 = run(AnalysisConfig::from_string(text));
  for (const AnalysisResult& r : r1.results) CHECK_MESSAGE(r.ok, r.error);
  CHECK((r1.to_json().dump(2) == r2.to_json().dump(2)));
  // meta carries the timing side channel and schema version only
  Json meta = r1.meta_json();
  CHECK((meta.at("schema_version") == 1));
  CHECK(meta.contains("wall_seconds"));
  CHECK(meta.contains("timings"));
}

TEST_CASE("emit writes the requested file set") {
  fs::path dir = fs::temp_directory_path() / "rigidlab_report_test_out";
  fs::remove_all(dir);
  const char* text = R"({
    "sequence": {"kind": "powers", "base": 2},
    "analyses": [
      {"name": "terms-a", "kind": "seq.terms", "hi": 4},
      {"name": "prof", "kind": "measure.gap_profile",
       "measure": {"kind": "riesz"}, "m_lo": 2, "m_hi": 4}
    ]
  })";
  Report rep = run(AnalysisConfig::from_string(text));

  emit(rep, "json", (dir / "a").string());
  CHECK(fs::exists(dir / "a" / "report.json"));
  CHECK(fs::exists(dir / "a" / "meta.json"));
  CHECK(!fs::exists(dir / "a" / "terms-a.csv"));

  emit(rep, "csv-tables", (dir / "b").string());
  CHECK(fs::exists(dir / "b" / "terms-a.csv"));
  std::string csv = slurp(dir / "b" / "terms-a.csv");
  CHECK((csv.substr(0, 4) == "m,n\n"));
  CHECK((csv.find("3,8") != std::string::npos));

  emit(rep, "plot-csv", (dir / "c").string());
  CHECK(fs::exists(dir / "c" / "prof.plot.csv"));
  std::string plot = slurp(dir / "c" / "prof.plot.csv");
  CHECK((plot.rfind("m,n_m,gap_lower,gap_upper\n", 0) == 0));

  // a second full pipeline pass produces byte-identical data files
  Report rep2 = run(AnalysisConfig::from_string(text));
  emit(rep2, "csv-tables", (dir / "d").string());
  CHECK((slurp(dir / "b" / "report.json") == slurp(dir / "d" / "report.json")));
  CHECK((slurp(dir / "b" / "terms-a.csv") == slurp(dir / "d" / "terms-a.csv")));

  CHECK_THROWS_AS(emit(rep, "yaml", (dir / "e").string()), ConfigError);
  fs::remove_all(dir);
}
