// Command line interface: closed-form probabilities, proposition checks,
// samplers, construction from binary blocks, and maximum-likelihood fitting.
//
// Exit codes: 0 success, 1 failed checks/unexpected error, 2 usage or parse
// problem, 3 model validation problem, 4 data degeneracy.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "olt/olt.hpp"

namespace {

constexpr const char* kSeedEnvVar = "OLT_SEED";

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnvVar);
  if (env == nullptr || *env == '\0') return 42;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(env, &end, 10);
  if (end == nullptr || *end != '\0') {
    throw olt::InvalidInputError(std::string(kSeedEnvVar) + " must be a nonnegative integer, got '" +
                                 env + "'");
  }
  return value;
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw olt::InvalidInputError("cannot open output file: " + path);
  out << content;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size() + 1, ' ');
}

struct ProbsArgs {
  std::string model_file;
  std::vector<double> thetas;
  std::string format = "table";
};

int run_probs(const ProbsArgs& args) {
  const auto spec = olt::load_model_spec(args.model_file);
  int k_max = 0;
  for (const auto& item : spec.items) k_max = std::max(k_max, item.k());

  struct Row {
    double theta;
    std::string item;
    std::vector<double> probs;
    std::vector<double> exceedance;
  };
  std::vector<Row> rows;
  for (double theta : args.thetas) {
    for (std::size_t i = 0; i < spec.items.size(); ++i) {
      const auto model = spec.model_for(i);
      Row row{theta, spec.items[i].item_id(), olt::category_probs(model, theta).probs(), {}};
      for (int r = 1; r <= model.k(); ++r) {
        row.exceedance.push_back(olt::exceedance_prob(model, theta, r));
      }
      rows.push_back(std::move(row));
    }
  }

  std::ostringstream out;
  if (args.format == "json") {
    auto doc = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
      nlohmann::ordered_json j;
      j["theta"] = row.theta;
      j["item"] = row.item;
      j["probs"] = row.probs;
      j["exceedance"] = row.exceedance;
      doc.push_back(std::move(j));
    }
    out << doc.dump(2) << "\n";
  } else if (args.format == "csv") {
    out << "theta,item";
    for (int r = 0; r <= k_max; ++r) out << ",p" << r;
    for (int r = 1; r <= k_max; ++r) out << ",exc" << r;
    out << "\n";
    for (const auto& row : rows) {
      out << olt::format_sig12(row.theta) << "," << row.item;
      for (int r = 0; r <= k_max; ++r) {
        out << ",";
        if (r < static_cast<int>(row.probs.size())) out << olt::format_sig12(row.probs[r]);
      }
      for (int r = 1; r <= k_max; ++r) {
        out << ",";
        if (r <= static_cast<int>(row.exceedance.size())) out << olt::format_sig12(row.exceedance[r - 1]);
      }
      out << "\n";
    }
  } else {
    constexpr std::size_t w = 16;
    out << pad("theta", w) << pad("item", w);
    for (int r = 0; r <= k_max; ++r) out << pad("p" + std::to_string(r), w);
    for (int r = 1; r <= k_max; ++r) out << pad("exc" + std::to_string(r), w);
    out << "\n";
    for (const auto& row : rows) {
      out << pad(olt::format_sig12(row.theta), w) << pad(row.item, w);
      for (int r = 0; r <= k_max; ++r) {
        out << pad(r < static_cast<int>(row.probs.size()) ? olt::format_sig12(row.probs[r]) : "", w);
      }
      for (int r = 1; r <= k_max; ++r) {
        out << pad(r <= static_cast<int>(row.exceedance.size())
                       ? olt::format_sig12(row.exceedance[r - 1])
                       : "",
                   w);
      }
      out << "\n";
    }
  }
  std::cout << out.str();
  return 0;
}

struct VerifyArgs {
  std::string prop = "all";
  int trials = 1000;
  std::optional<std::uint64_t> seed;
  int k_min = 2;
  int k_max = 8;
};

int run_verify(const VerifyArgs& args) {
  const std::uint64_t seed = args.seed.value_or(default_seed());
  const olt::KRange k_range{args.k_min, args.k_max};
  std::vector<olt::VerificationReport> reports;
  if (args.prop == "all") {
    for (olt::PropositionId id : olt::kAllPropositions) {
      reports.push_back(olt::verify(id, args.trials, seed, k_range));
    }
  } else {
    reports.push_back(olt::verify(olt::proposition_from_string(args.prop), args.trials, seed, k_range));
  }
  auto doc = nlohmann::ordered_json::array();
  bool all_passed = true;
  for (const auto& report : reports) {
    all_passed = all_passed && report.passed;
    doc.push_back(olt::to_json(report));
  }
  std::cout << doc.dump(2) << "\n";
  return all_passed ? 0 : 1;
}

struct SimulateArgs {
  std::string model_file;
  std::vector<double> thetas;
  std::vector<double> theta_normal;  // mu, sd, n
  long n = 1;
  std::string method = "direct";
  std::optional<std::uint64_t> seed;
  std::string out = "-";
  std::string abilities_out;
};

int run_simulate(const SimulateArgs& args) {
  const auto spec = olt::load_model_spec(args.model_file);
  const auto method = olt::sample_method_from_string(args.method);
  const std::uint64_t seed = args.seed.value_or(default_seed());
  if (args.n < 1) throw olt::InvalidInputError("simulate: --n must be >= 1");
  if (args.thetas.empty() == args.theta_normal.empty()) {
    throw olt::InvalidInputError("simulate: give exactly one of --theta or --theta-normal");
  }

  std::vector<olt::OrdinalModel> models;
  for (std::size_t i = 0; i < spec.items.size(); ++i) {
    models.push_back(spec.model_for(i));
    if (!olt::method_compatible(method, models.back().family())) {
      throw olt::InvalidInputError(std::string("simulate: method '") + args.method +
                                   "' is incompatible with the " +
                                   olt::to_string(models.back().family()) + " family");
    }
  }

  std::vector<double> thetas = args.thetas;
  if (!args.theta_normal.empty()) {
    if (args.theta_normal.size() != 3) {
      throw olt::InvalidInputError("simulate: --theta-normal expects mu,sd,n");
    }
    const double mu = args.theta_normal[0];
    const double sd = args.theta_normal[1];
    const long count = static_cast<long>(args.theta_normal[2]);
    if (!(sd >= 0.0) || count < 1 || args.theta_normal[2] != static_cast<double>(count)) {
      throw olt::InvalidInputError("simulate: --theta-normal needs sd >= 0 and integer n >= 1");
    }
    olt::Rng theta_rng = olt::Rng::derived(seed, models.size());
    thetas.clear();
    for (long i = 0; i < count; ++i) thetas.push_back(mu + sd * theta_rng.normal());
  }

  olt::Dataset data;
  for (std::size_t i = 0; i < spec.items.size(); ++i) {
    data.items.push_back({spec.items[i].item_id(), spec.items[i].k()});
  }
  const long total = static_cast<long>(thetas.size()) * args.n;
  data.person_ids.reserve(static_cast<std::size_t>(total));
  data.responses.reserve(static_cast<std::size_t>(total));
  std::vector<double> person_thetas;
  person_thetas.reserve(static_cast<std::size_t>(total));
  for (double theta : thetas) {
    for (long rep = 0; rep < args.n; ++rep) {
      data.person_ids.push_back("p" + std::to_string(data.person_ids.size() + 1));
      person_thetas.push_back(theta);
      data.responses.emplace_back();
    }
  }

  // one independent stream per item; adding items never shifts other columns
  for (std::size_t i = 0; i < models.size(); ++i) {
    olt::Rng rng = olt::Rng::derived(seed, i);
    const auto& model = models[i];
    long proposals = 0;
    std::vector<double> pis;
    for (std::size_t p = 0; p < data.responses.size(); ++p) {
      const double theta = person_thetas[p];
      int score = 0;
      switch (method) {
        case olt::SampleMethod::DirectCategorical:
          score = olt::draw_direct(rng, olt::category_probs(model, theta));
          break;
        case olt::SampleMethod::LatentVariable:
          score = olt::draw_latent(rng, model, theta);
          break;
        case olt::SampleMethod::MarkovSteps:
          score = olt::draw_markov(rng, model, theta);
          break;
        case olt::SampleMethod::GuttmanRejection: {
          pis.clear();
          for (double d : model.thresholds().deltas()) {
            pis.push_back(model.response_function()(theta - d));
          }
          score = olt::draw_guttman_rejection(rng, pis, proposals, 100000000L);
          break;
        }
      }
      data.responses[p].push_back(score);
    }
    if (method == olt::SampleMethod::GuttmanRejection) {
      const double rate = static_cast<double>(data.responses.size()) / static_cast<double>(proposals);
      std::cerr << "item=" << data.items[i].id << " method=rejection acceptance_rate="
                << olt::format_sig12(rate) << " proposals=" << proposals << "\n";
    }
  }

  write_output(args.out, olt::response_csv_to_string(data));
  if (!args.abilities_out.empty()) {
    write_output(args.abilities_out, olt::abilities_csv_to_string(data.person_ids, person_thetas));
  }
  return 0;
}

struct FitArgs {
  std::string data_file;
  std::string family;
  std::string mode = "fixed-theta";
  std::string abilities_file;
  std::string out = "-";
  int max_iter = 200;
  double tol = 1e-8;
};

int run_fit(const FitArgs& args) {
  const auto data = olt::load_response_csv(args.data_file);
  const olt::Family family = olt::family_from_string(args.family);
  olt::FitOptions options;
  options.mode = args.mode == "joint" ? olt::FitOptions::Mode::JointAlternating
                                      : olt::FitOptions::Mode::FixAbilities;
  options.max_iter = args.max_iter;
  options.tol = args.tol;

  std::vector<double> abilities;
  if (options.mode == olt::FitOptions::Mode::FixAbilities) {
    if (args.abilities_file.empty()) {
      throw olt::InvalidInputError("fit: --mode fixed-theta requires --abilities");
    }
    const auto listed = olt::load_abilities_csv(args.abilities_file);
    std::map<std::string, double> by_id(listed.begin(), listed.end());
    for (const auto& person : data.person_ids) {
      const auto found = by_id.find(person);
      if (found == by_id.end()) {
        throw olt::ValidationError("fit: no ability listed for person '" + person + "'");
      }
      abilities.push_back(found->second);
    }
  }

  const auto result = olt::fit(data, family, options, abilities);
  write_output(args.out, olt::to_json(result, data, family, options.mode).dump(2) + "\n");
  return 0;
}

struct CurvesArgs {
  std::string model_file;
  std::string grid;
  std::string out = "-";
};

int run_curves(const CurvesArgs& args) {
  const auto spec = olt::load_model_spec(args.model_file);
  double lo = 0.0, hi = 0.0, step = 0.0;
  char trailing = '\0';
  const int matched = std::sscanf(args.grid.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &trailing);
  if (matched != 3 || !std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step) ||
      step <= 0.0 || hi < lo) {
    throw olt::InvalidInputError("curves: --grid must be lo:hi:step with step > 0 and hi >= lo");
  }
  const long n_points = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;

  std::ostringstream out;
  out << "theta,item,category,prob\n";
  for (long i = 0; i < n_points; ++i) {
    const double theta = lo + step * static_cast<double>(i);
    for (std::size_t item = 0; item < spec.items.size(); ++item) {
      const auto model = spec.model_for(item);
      const auto probs = olt::category_probs(model, theta).probs();
      for (int r = 0; r <= model.k(); ++r) {
        out << olt::format_sig12(theta) << "," << spec.items[item].item_id() << "," << r << ","
            << olt::format_sig12(probs[static_cast<std::size_t>(r)]) << "\n";
      }
    }
  }
  write_output(args.out, out.str());
  return 0;
}

struct ConstructArgs {
  std::string kind;
  std::vector<double> blocks;
};

int run_construct(const ConstructArgs& args) {
  olt::OrdinalDistribution dist = [&] {
    if (args.kind == "cumulative") {
      return olt::build_cumulative(olt::BinaryBlockSpec(olt::BlockKind::MarginalRasch, args.blocks));
    }
    if (args.kind == "sequential") {
      return olt::build_sequential(
          olt::BinaryBlockSpec(olt::BlockKind::ConditionalTransition, args.blocks));
    }
    return olt::build_pcm(olt::BinaryBlockSpec(olt::BlockKind::LocalAdjacent, args.blocks));
  }();
  nlohmann::ordered_json doc;
  doc["kind"] = args.kind;
  doc["blocks"] = args.blocks;
  doc["probs"] = dist.probs();
  std::cout << doc.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordered latent trait models: probabilities, binary-block construction, "
               "proposition checks, samplers, and maximum-likelihood fitting.\n"
               "The environment variable " +
               std::string(kSeedEnvVar) + " overrides the default seed (42)."};
  app.require_subcommand(1);

  ProbsArgs probs_args;
  auto* probs = app.add_subcommand("probs", "Category and exceedance probabilities for a model file");
  probs->add_option("model", probs_args.model_file, "Model spec JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  probs->add_option("--theta", probs_args.thetas, "Ability values (comma separated)")
      ->required()
      ->delimiter(',');
  probs->add_option("--format", probs_args.format, "Output format")
      ->check(CLI::IsMember({"table", "csv", "json"}));

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Run randomized numerical checks of the model identities");
  verify->add_option("--prop", verify_args.prop,
                     "Proposition tag or 'all' (see README for the twelve tags)");
  verify->add_option("--trials", verify_args.trials, "Randomized trials per proposition")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_args.seed, "Random seed");
  verify->add_option("--k-min", verify_args.k_min, "Smallest category count k");
  verify->add_option("--k-max", verify_args.k_max, "Largest category count k");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Draw responses and write a dataset CSV");
  simulate->add_option("model", sim_args.model_file, "Model spec JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* theta_opt =
      simulate->add_option("--theta", sim_args.thetas, "Ability values (comma separated)")->delimiter(',');
  simulate->add_option("--theta-normal", sim_args.theta_normal, "Draw abilities: mu,sd,n")
      ->delimiter(',')
      ->excludes(theta_opt);
  simulate->add_option("--n", sim_args.n, "Replicates per ability value");
  simulate->add_option("--method", sim_args.method, "latent | markov | direct | rejection")
      ->check(CLI::IsMember({"latent", "markov", "direct", "rejection"}));
  simulate->add_option("--seed", sim_args.seed, "Random seed");
  simulate->add_option("--out", sim_args.out, "Output CSV path ('-' for stdout)");
  simulate->add_option("--abilities-out", sim_args.abilities_out, "Also write person_id,theta CSV");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Maximum-likelihood threshold estimation from a dataset CSV");
  fit->add_option("data", fit_args.data_file, "Response CSV file")->required()->check(CLI::ExistingFile);
  fit->add_option("--family", fit_args.family, "Model family")
      ->required()
      ->check(CLI::IsMember({"cumulative", "sequential", "pcm"}));
  fit->add_option("--mode", fit_args.mode, "fixed-theta | joint")
      ->check(CLI::IsMember({"fixed-theta", "joint"}));
  fit->add_option("--abilities", fit_args.abilities_file, "person_id,theta CSV (fixed-theta mode)");
  fit->add_option("--out", fit_args.out, "Output JSON path ('-' for stdout)");
  fit->add_option("--max-iter", fit_args.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  fit->add_option("--tol", fit_args.tol, "Gradient sup-norm tolerance");

  CurvesArgs curves_args;
  auto* curves = app.add_subcommand("curves", "Category characteristic curves as a CSV point cloud");
  curves->add_option("model", curves_args.model_file, "Model spec JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  curves->add_option("--grid", curves_args.grid, "Theta grid lo:hi:step")->required();
  curves->add_option("--out", curves_args.out, "Output CSV path ('-' for stdout)");

  ConstructArgs construct_args;
  auto* construct = app.add_subcommand("construct", "Assemble a distribution from binary blocks");
  construct->add_option("--kind", construct_args.kind, "Block interpretation")
      ->required()
      ->check(CLI::IsMember({"cumulative", "sequential", "pcm"}));
  construct->add_option("--blocks", construct_args.blocks, "Block probabilities (comma separated)")
      ->required()
      ->delimiter(',');

  int rc = 0;
  probs->callback([&] { rc = run_probs(probs_args); });
  verify->callback([&] { rc = run_verify(verify_args); });
  simulate->callback([&] { rc = run_simulate(sim_args); });
  fit->callback([&] { rc = run_fit(fit_args); });
  curves->callback([&] { rc = run_curves(curves_args); });
  construct->callback([&] { rc = run_construct(construct_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const olt::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const olt::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const olt::DegenerateItemError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const olt::DegenerateConditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const olt::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const olt::IndexError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const olt::UnsupportedOperationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const olt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
