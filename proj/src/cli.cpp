#include "cbdp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "cbdp/batch.hpp"
#include "cbdp/dating.hpp"
#include "cbdp/densities.hpp"
#include "cbdp/errors.hpp"
#include "cbdp/format.hpp"
#include "cbdp/forward_sim.hpp"
#include "cbdp/moments.hpp"
#include "cbdp/numerics.hpp"
#include "cbdp/phylo.hpp"
#include "cbdp/pointproc.hpp"
#include "cbdp/rng.hpp"
#include "cbdp/validation.hpp"
#include "cbdp/version.hpp"

namespace cbdp {

namespace {

// Everything a command may use; validated before dispatch.
struct RunConfig {
  double lambda = 1.0;
  double mu = 0.0;
  int n = 0;
  int k = 0;
  int l = 0;
  int moment = 1;
  double age = 0.0;
  std::string condition = "origin";
  std::string prior;
  std::uint64_t seed = kDefaultSeed;
  std::size_t count = 1;
  unsigned jobs = 1;
  double tol = kDefaultTol;
  int precision = 12;
  std::string output;
  std::string input;
  std::string sidecar;
  std::string density = "kth";
  double from = 0.0;
  double to = 0.0;
  int points = 101;
  double alpha = 0.95;
  bool no_intervals = false;
  bool normalize = false;
  std::size_t max_attempts = kDefaultMaxAttempts;
  double t_max = 0.0;

  std::vector<CLI::Option*> age_opts;  // one per subcommand
  CLI::Option* k_opt = nullptr;
  CLI::Option* to_opt = nullptr;
};

BDParams params_of(const RunConfig& cfg) { return BDParams(cfg.lambda, cfg.mu); }

AgeCondition condition_of(const RunConfig& cfg) {
  const bool has_age = std::any_of(cfg.age_opts.begin(), cfg.age_opts.end(),
                                   [](const CLI::Option* opt) { return opt->count() > 0; });
  if (!cfg.prior.empty() && has_age) throw DomainError("--age and --prior are mutually exclusive");
  if (!has_age) return AgeCondition::uniform_prior();
  return cfg.condition == "mrca" ? AgeCondition::mrca(cfg.age) : AgeCondition::origin(cfg.age);
}

void require_n(const RunConfig& cfg) {
  if (cfg.n < 2) throw DomainError("--n must be >= 2");
}

std::string invocation(const std::vector<std::string>& args) {
  std::string text = "cbdp";
  for (const auto& arg : args) {
    text.push_back(' ');
    const bool plain = !arg.empty() && arg.find_first_of(" \t\"'\\") == std::string::npos;
    text += plain ? arg : "'" + arg + "'";
  }
  return text;
}

void write_header(std::ostream& out, const std::vector<std::string>& args) {
  out << "# cbdp " << kVersion << ": " << invocation(args) << '\n';
}

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open input file '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(file), {});
}

// Upper end of a plotting grid when no age bounds the support.
double tail_bound(const std::function<double(double)>& cdf, double start) {
  double hi = start;
  for (int i = 0; i < 2000 && cdf(hi) < 0.999; ++i) hi *= 2.0;
  return invert_monotone_cdf(cdf, 0.999, 0.0, hi, 1e-9);
}

void cmd_density(const RunConfig& cfg, std::ostream& out, const std::vector<std::string>& args) {
  const auto p = params_of(cfg);
  const auto cond = condition_of(cfg);
  std::function<double(double)> pdf;
  std::function<double(double)> cdf;
  double upper = cond.has_age() ? cond.age() : 0.0;

  if (cfg.density == "spec-time") {
    if (!cond.has_age()) throw DomainError("spec-time density needs --age");
    pdf = [&](double s) { return spec_time_pdf(p, s, cond); };
    cdf = [&](double s) { return spec_time_cdf(p, s, cond); };
  } else if (cfg.density == "origin") {
    require_n(cfg);
    if (cond.has_age()) throw DomainError("origin density is the posterior under --prior uniform");
    pdf = [&](double t) { return origin_pdf(p, t, cfg.n); };
    cdf = [&](double t) { return origin_cdf(p, t, cfg.n); };
    upper = origin_inv_cdf(p, 0.999, cfg.n);
  } else if (cfg.density == "kth") {
    require_n(cfg);
    switch (cond.kind()) {
      case AgeCondition::Kind::OriginAge:
        pdf = [&](double s) { return kth_pdf_given_age(p, cfg.n, cfg.k, s, cond.age()); };
        cdf = [&](double s) { return kth_cdf_given_age(p, cfg.n, cfg.k, s, cond.age()); };
        break;
      case AgeCondition::Kind::MrcaAge:
        if (cfg.k < 2) throw DomainError("under mrca conditioning the first event is a point mass; use --k >= 2");
        pdf = [&](double s) { return kth_pdf_given_age(p, cfg.n - 1, cfg.k - 1, s, cond.age()); };
        cdf = [&](double s) { return kth_cdf_given_age(p, cfg.n - 1, cfg.k - 1, s, cond.age()); };
        break;
      case AgeCondition::Kind::UniformPrior:
        pdf = [&](double s) { return kth_pdf_uniform_prior(p, cfg.n, cfg.k, s); };
        cdf = [&](double s) { return kth_cdf_uniform_prior(p, cfg.n, cfg.k, s); };
        upper = tail_bound(cdf, std::max(expected_kth_uniform_prior(p, cfg.n, cfg.k).value, 1e-6));
        break;
    }
  } else if (cfg.density == "gap") {
    require_n(cfg);
    if (cond.kind() == AgeCondition::Kind::OriginAge) {
      pdf = [&](double s) { return gap_pdf_given_age(p, cfg.n, cfg.k, cfg.l, s, cond.age(), cfg.tol); };
    } else if (cond.kind() == AgeCondition::Kind::UniformPrior) {
      pdf = [&](double s) { return gap_pdf_yule_uniform_prior(p, cfg.n, cfg.k, cfg.l, s); };
      upper = tail_bound([&](double s) { return kth_cdf_uniform_prior(p, cfg.n, cfg.k, s); },
                         std::max(expected_kth_uniform_prior(p, cfg.n, cfg.k).value, 1e-6));
    } else {
      throw DomainError("gap densities need an origin age or the flat prior");
    }
  } else {
    throw DomainError("unknown density '" + cfg.density + "' (spec-time, origin, kth, gap)");
  }

  const double lo = cfg.from;
  const double hi = cfg.to_opt->count() > 0 ? cfg.to : upper;
  if (!(hi > lo) || cfg.points < 2) throw DomainError("grid needs --to > --from and --points >= 2");

  write_header(out, args);
  out << (cdf ? "x\tpdf\tcdf\n" : "x\tpdf\n");
  for (int i = 0; i < cfg.points; ++i) {
    const double x = lo + (hi - lo) * i / (cfg.points - 1);
    out << format_number(x, cfg.precision) << '\t' << format_number(pdf(x), cfg.precision);
    if (cdf) out << '\t' << format_number(cdf(x), cfg.precision);
    out << '\n';
  }
}

void cmd_expect(const RunConfig& cfg, std::ostream& out, const std::vector<std::string>& args) {
  require_n(cfg);
  const auto p = params_of(cfg);
  const auto cond = condition_of(cfg);
  auto moment = [&](int k) {
    return cfg.moment == 1 ? expected_kth(p, cfg.n, k, cond) : numeric_moment(p, cfg.n, k, cfg.moment, cond);
  };
  if (cfg.k_opt->count() > 0) {
    out << format_number(moment(cfg.k).value, cfg.precision) << '\n';
    return;
  }
  write_header(out, args);
  out << "k\tvalue\tmethod\tcancellation\n";
  for (int k = 1; k < cfg.n; ++k) {
    const auto result = moment(k);
    out << k << '\t' << format_number(result.value, cfg.precision) << '\t' << to_string(result.method) << '\t'
        << (result.cancellation_flag ? 1 : 0) << '\n';
  }
}

void cmd_simulate(const RunConfig& cfg, std::ostream& out, bool oracle) {
  require_n(cfg);
  const auto p = params_of(cfg);
  const auto cond = condition_of(cfg);
  if (cfg.condition == "mrca" && !cond.has_age()) throw DomainError("--condition mrca needs --age");
  const auto trees = parallel_generate(cfg.count, cfg.jobs, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    const OrientedTree tree = oracle ? rejection_sample_conditioned(p, cfg.n, cond, rng, cfg.max_attempts,
                                                                    nullptr, cfg.t_max)
                                     : point_process_to_tree(sample_point_process(p, cfg.n, cond, rng));
    return write_newick(label_uniformly(tree, rng), cfg.precision);
  });
  for (const auto& tree : trees) out << tree << '\n';
}

void cmd_date(const RunConfig& cfg, std::ostream& out, const std::vector<std::string>& args) {
  const auto p = params_of(cfg);
  const auto cond = condition_of(cfg);
  const auto trees = parse_newick_stream(read_input(cfg.input));
  if (trees.empty()) throw DomainError("no trees in input");
  DatingOptions options;
  options.alpha = cfg.alpha;
  options.intervals = !cfg.no_intervals;

  std::unique_ptr<std::ofstream> sidecar;
  if (!cfg.sidecar.empty()) {
    sidecar = std::make_unique<std::ofstream>(cfg.sidecar, std::ios::binary);
    if (!*sidecar) throw Error("cannot open sidecar file '" + cfg.sidecar + "'");
    write_header(*sidecar, args);
  }
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto dated = date_tree(trees[i], p, cond, options);
    out << write_newick(dated.tree, cfg.precision) << '\n';
    if (sidecar) {
      if (trees.size() > 1) *sidecar << "# tree " << i + 1 << '\n';
      write_dating_tsv(*sidecar, dated, cfg.precision);
    }
  }
}

void cmd_ltt(const RunConfig& cfg, std::ostream& out, const std::vector<std::string>& args) {
  if (!cfg.input.empty()) {
    const auto trees = parse_newick_stream(read_input(cfg.input));
    write_header(out, args);
    for (std::size_t i = 0; i < trees.size(); ++i) {
      if (trees.size() > 1) out << "# tree " << i + 1 << '\n';
      write_ltt_tsv(out, ltt_from_tree(trees[i]), cfg.precision);
    }
    return;
  }
  require_n(cfg);
  const auto curve = expected_ltt(params_of(cfg), cfg.n, cfg.normalize, condition_of(cfg));
  write_header(out, args);
  if (cfg.normalize) out << "# normalized expectations: 1 - E[A^k] / E[A^1]\n";
  write_ltt_tsv(out, curve, cfg.precision);
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, const std::vector<std::string>& args) {
  const auto results = run_validation_suite(cfg.seed, cfg.jobs);
  write_header(out, args);
  write_validation_table(out, results);
  const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
  return ok ? kExitOk : kExitValidation;
}

void add_model(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--lambda", cfg.lambda, "Birth rate")->capture_default_str();
  cmd->add_option("--mu", cfg.mu, "Death rate")->capture_default_str();
}

void add_age(CLI::App* cmd, RunConfig& cfg) {
  cfg.age_opts.push_back(cmd->add_option("--age", cfg.age, "Known tree age (omit for the flat prior)"));
  cmd->add_option("--condition", cfg.condition, "What --age refers to")
      ->check(CLI::IsMember({"origin", "mrca"}))
      ->capture_default_str();
  cmd->add_option("--prior", cfg.prior, "Prior on the origin when the age is unknown")
      ->check(CLI::IsMember({"uniform"}));
}

void add_output(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--precision", cfg.precision, "Significant digits (decimals for Newick lengths)")
      ->check(CLI::Range(1, 17))
      ->capture_default_str();
  cmd->add_option("-o,--out", cfg.output, "Output file (default: standard output)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Speciation times and trees of the birth-death process conditioned on n species", "cbdp"};
  app.set_version_flag("--version", std::string("cbdp ") + kVersion);
  app.require_subcommand(1, 1);

  auto* density = app.add_subcommand("density", "Grid of pdf/cdf values (TSV)");
  add_model(density, cfg);
  add_age(density, cfg);
  add_output(density, cfg);
  density->add_option("--density", cfg.density, "spec-time, origin, kth or gap")->capture_default_str();
  density->add_option("--n", cfg.n, "Number of extant species");
  density->add_option("--k", cfg.k, "Event index (1 = oldest)");
  density->add_option("--l", cfg.l, "Second event index for gaps");
  density->add_option("--from", cfg.from, "Grid start")->capture_default_str();
  cfg.to_opt = density->add_option("--to", cfg.to, "Grid end (default: age or 0.999 quantile)");
  density->add_option("--points", cfg.points, "Grid size")->capture_default_str();
  density->add_option("--tol", cfg.tol, "Quadrature tolerance")->capture_default_str();

  auto* expect = app.add_subcommand("expect", "Expected speciation times E[A^k] (TSV)");
  add_model(expect, cfg);
  add_age(expect, cfg);
  add_output(expect, cfg);
  expect->add_option("--n", cfg.n, "Number of extant species")->required();
  auto* expect_k = expect->add_option("--k", cfg.k, "Single event index; prints the bare value");
  expect->add_option("--moment", cfg.moment, "Moment order")->check(CLI::PositiveNumber)->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Sample trees from the point process (Newick stream)");
  auto* oracle = app.add_subcommand("oracle-simulate", "Sample trees by forward rejection (small n)");
  for (auto* cmd : {simulate, oracle}) {
    add_model(cmd, cfg);
    add_age(cmd, cfg);
    add_output(cmd, cfg);
    cmd->add_option("--n", cfg.n, "Number of extant species")->required();
    cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    cmd->add_option("--count", cfg.count, "Number of trees")->capture_default_str();
    cmd->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  }
  oracle->add_option("--max-attempts", cfg.max_attempts, "Rejection budget per tree")->capture_default_str();
  oracle->add_option("--t-max", cfg.t_max, "Origin proposal bound under the flat prior");

  auto* date = app.add_subcommand("date", "Expected vertex ages of undated trees (Newick in and out)");
  add_model(date, cfg);
  add_age(date, cfg);
  add_output(date, cfg);
  date->add_option("--in", cfg.input, "Newick input file ('-' for standard input)")->required();
  date->add_option("--sidecar", cfg.sidecar, "TSV file with per-vertex ages and intervals");
  date->add_option("--alpha", cfg.alpha, "Interval coverage")->capture_default_str();
  date->add_flag("--no-intervals", cfg.no_intervals, "Skip quantile intervals");

  auto* ltt = app.add_subcommand("ltt", "Expected or per-tree lineages-through-time curves (TSV)");
  add_model(ltt, cfg);
  add_age(ltt, cfg);
  add_output(ltt, cfg);
  auto* ltt_n = ltt->add_option("--n", cfg.n, "Number of extant species (expected curve)");
  ltt->add_option("--in", cfg.input, "Newick input for per-tree curves")->excludes(ltt_n);
  ltt->add_flag("--normalize", cfg.normalize, "Map the mrca to 0 and the present to 1");

  auto* validate = app.add_subcommand("validate", "Built-in numerical cross-checks");
  validate->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  validate->add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  validate->add_option("-o,--out", cfg.output, "Output file (default: standard output)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "cbdp " << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cbdp: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  cfg.k_opt = expect_k;

  try {
    std::ofstream file;
    if (!cfg.output.empty()) {
      file.open(cfg.output, std::ios::binary);
      if (!file) throw Error("cannot open output file '" + cfg.output + "'");
    }
    std::ostream& sink = cfg.output.empty() ? out : file;
    int code = kExitOk;
    if (density->parsed()) {
      cmd_density(cfg, sink, args);
    } else if (expect->parsed()) {
      cmd_expect(cfg, sink, args);
    } else if (simulate->parsed()) {
      cmd_simulate(cfg, sink, false);
    } else if (oracle->parsed()) {
      cmd_simulate(cfg, sink, true);
    } else if (date->parsed()) {
      cmd_date(cfg, sink, args);
    } else if (ltt->parsed()) {
      cmd_ltt(cfg, sink, args);
    } else if (validate->parsed()) {
      code = cmd_validate(cfg, sink, args);
    }
    sink.flush();
    return code;
  } catch (const ParameterError& e) {
    err << "cbdp: parameter error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "cbdp: invalid argument: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RegimeError& e) {
    err << "cbdp: unsupported regime: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "cbdp: error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace cbdp
