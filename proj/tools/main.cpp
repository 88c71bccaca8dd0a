// Command-line front door: one-shot analyses from flags, or batches from a
// JSON config file.  Exit codes: 0 ok, 1 bad config/usage, 2 budget or
// precision shortfall, 3 broken internal invariant.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "rigidlab/errors.hpp"
#include "rigidlab/report.hpp"

namespace {

using rigidlab::Json;

struct SubState {
  std::string op;
  std::vector<std::string> args;
  std::string spec;
  std::string measure;
  std::string quotients;
  std::string radixes;
  std::string extend = "repeat";
  bool golden = false;
};

Json parse_arg_value(const std::string& v) {
  try {
    return Json::parse(v);
  } catch (const nlohmann::json::parse_error&) {
    return Json(v);  // plain string (covers "1/8", "inv_log", ...)
  }
}

Json csv_ints(const std::string& s) {
  Json arr = Json::array();
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) arr.push_back(cur);
      cur.clear();
    } else if (!isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  return arr;
}

// short op aliases per subcommand
const std::map<std::string, std::string> kKindAlias = {
    {"seq.sums", "seq.finite_sums"},
    {"measure.profile", "measure.gap_profile"},
    {"measure.atoms", "measure.atom_bounds"},
    {"measure.blocks", "measure.block_events"},
    {"measure.build", "measure.cantor_build"},
    {"rankone.word", "rankone.chacon_word"},
    {"rankone.shift", "rankone.chacon_shift"},
    {"rotation.count", "rotation.count_close"},
    {"odometer.sum", "odometer.cocycle_sum"},
};

int exit_code_for(const std::string& message) {
  if (message.rfind("config:", 0) == 0) return 1;
  if (message.rfind("budget:", 0) == 0) return 2;
  if (message.rfind("precision:", 0) == 0) return 2;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rigidlab: exact and certified checks for return-time sequences,\n"
      "circle measures, cutting-and-stacking towers, rotations and\n"
      "adding machines"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, format = "json";
  long long seed = -1, precision_bits = -1, horizon = -1;
  app.add_option("--config", config_path, "JSON config file (run subcommand)");
  app.add_option("--seed", seed, "rng seed override (default 0)");
  app.add_option("--precision-bits", precision_bits,
                 "working precision override");
  app.add_option("--horizon", horizon, "default index horizon override");
  app.add_option("--out", out_dir, "output directory (default: print report)");
  app.add_option("--format", format, "json | csv-tables | plot-csv")
      ->check(CLI::IsMember({"json", "csv-tables", "plot-csv"}));

  std::map<std::string, SubState> subs;
  for (const char* name : {"seq", "obstruct", "measure", "rankone", "rotation",
                           "odometer"}) {
    CLI::App* sc = app.add_subcommand(
        name, std::string("one-shot ") + name + " analysis");
    SubState& st = subs[name];
    sc->add_option("op", st.op, "operation name")->required();
    sc->add_option("--arg", st.args,
                   "extra parameter key=value (value parsed as JSON when "
                   "possible; repeatable)");
    sc->add_option("--spec", st.spec, "sequence spec as JSON");
    sc->add_option("--measure", st.measure, "measure spec as JSON");
    sc->add_option("--quotients", st.quotients,
                   "comma-separated partial quotients");
    sc->add_option("--radixes", st.radixes, "comma-separated digit sizes");
    sc->add_option("--extend", st.extend, "repeat | cycle");
    sc->add_flag("--golden", st.golden, "use the golden-ratio angle");
  }
  app.add_subcommand("run", "run every analysis in --config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int r = app.exit(e);
    return r == 0 ? 0 : 1;
  }

  try {
    Json doc;
    if (!config_path.empty())
      doc = rigidlab::AnalysisConfig::from_file(config_path).doc;
    else
      doc = Json::object();
    if (seed >= 0) doc["seed"] = static_cast<std::uint64_t>(seed);
    if (precision_bits >= 0)
      doc["precision_bits"] = static_cast<std::uint64_t>(precision_bits);
    if (horizon >= 0) doc["horizon"] = static_cast<std::uint64_t>(horizon);

    bool one_shot = false;
    CLI::App* picked = app.get_subcommands().front();
    std::string sub = picked->get_name();
    if (sub != "run") {
      one_shot = true;
      const SubState& st = subs[sub];
      std::string kind =
          st.op.find('.') != std::string::npos ? st.op : sub + "." + st.op;
      auto alias = kKindAlias.find(kind);
      if (alias != kKindAlias.end()) kind = alias->second;

      Json a;
      a["name"] = sub + "-" + st.op;
      a["kind"] = kind;
      if (!st.measure.empty()) {
        try {
          a["measure"] = Json::parse(st.measure);
        } catch (const nlohmann::json::parse_error& e) {
          throw rigidlab::ConfigError(std::string("--measure: ") + e.what());
        }
      }
      if (st.golden) a["golden"] = true;
      if (!st.quotients.empty()) a["quotients"] = csv_ints(st.quotients);
      if (!st.radixes.empty()) a["radixes"] = csv_ints(st.radixes);
      if (!st.extend.empty()) a["extend"] = st.extend;
      for (const std::string& kv : st.args) {
        auto pos = kv.find('=');
        if (pos == std::string::npos || pos == 0)
          throw rigidlab::ConfigError("--arg needs key=value, got '" + kv + "'");
        a[kv.substr(0, pos)] = parse_arg_value(kv.substr(pos + 1));
      }
      if (!st.spec.empty()) {
        try {
          doc["sequence"] = Json::parse(st.spec);
        } catch (const nlohmann::json::parse_error& e) {
          throw rigidlab::ConfigError(std::string("--spec: ") + e.what());
        }
      }
      doc["analyses"] = Json::array({a});
    } else if (config_path.empty()) {
      throw rigidlab::ConfigError("run needs --config FILE");
    }

    rigidlab::Report rep = rigidlab::run(rigidlab::AnalysisConfig{doc});

    if (!out_dir.empty()) {
      rigidlab::emit(rep, format, out_dir);
      std::cout << "wrote " << (rep.results.size()) << " result(s) to "
                << out_dir << "\n";
    } else {
      std::cout << rep.to_json().dump(2) << "\n";
    }

    if (one_shot) {
      // a single failed analysis surfaces its error class as the exit code
      for (const rigidlab::AnalysisResult& r : rep.results) {
        if (!r.ok) {
          std::cerr << "error: " << r.error << "\n";
          return exit_code_for(r.error);
        }
      }
    }
    return 0;
  } catch (const rigidlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const rigidlab::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rigidlab::PrecisionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
