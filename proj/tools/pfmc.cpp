#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "pfmc/diagnostics.hpp"
#include "pfmc/evidence.hpp"
#include "pfmc/mathutil.hpp"
#include "pfmc/studies.hpp"

namespace {

using namespace pfmc;

std::vector<double> parse_theta(const Model& model, const std::string& spec) {
  std::vector<double> theta = model.default_theta();
  if (spec.empty()) return theta;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    const auto comma = spec.find(',', pos);
    const std::string item =
        spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("bad --theta entry '" + item + "' (expected name=value)");
    theta[model.param_index(item.substr(0, eq))] = std::stod(item.substr(eq + 1));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return theta;
}

struct CommonModelArgs {
  std::string model = "ar1";
  long trials = 100;
  std::string theta;
};

void add_model_options(CLI::App* cmd, CommonModelArgs& args) {
  cmd->add_option("--model", args.model,
                  "Model: ar1, binomial, sv, sv-lev, sv-out, sv-lev-out, garch");
  cmd->add_option("--m", args.trials, "Binomial trial count");
  cmd->add_option("--theta", args.theta, "Parameter overrides, e.g. mu=0.1,phi=0.9");
}

int cmd_simulate(const CommonModelArgs& margs, long T, std::uint64_t seed,
                 const std::string& out) {
  const auto model = make_model(margs.model, margs.trials);
  const auto theta = parse_theta(*model, margs.theta);
  RandomStream rs(seed, 0);
  Dataset data = model->simulate(theta, T, rs);
  write_dataset(data, out);
  std::cout << "wrote " << out << " (T=" << T << ")\n";
  return 0;
}

int cmd_filter(const CommonModelArgs& margs, const std::string& data_path,
               const std::string& variant, std::size_t particles, double epsilon, long reps,
               bool exact, std::uint64_t seed, const std::string& outdir,
               std::size_t threads) {
  const auto model = make_model(margs.model, margs.trials);
  const auto theta = parse_theta(*model, margs.theta);
  const Dataset data = load_dataset(data_path);

  LikelihoodSpec lik;
  lik.exact_kalman = exact;
  lik.filter.variant = parse_variant(variant);
  lik.filter.n_particles = particles;
  lik.filter.epsilon = epsilon;

  const auto lls = parallel_map(threads, static_cast<std::size_t>(reps), [&](std::size_t r) {
    return eval_loglik(*model, theta, data, lik, seed, r, 1);
  });

  std::filesystem::create_directories(outdir);
  {
    std::ofstream csv(outdir + "/loglik.csv");
    csv << "rep,loglik\n";
    for (std::size_t r = 0; r < lls.size(); ++r)
      csv << (r + 1) << ',' << format_double(lls[r]) << '\n';
  }
  nlohmann::json j;
  j["model"] = model->info().name;
  j["data"] = data_path;
  j["variant"] = exact ? "kalman" : variant;
  j["particles"] = particles;
  j["reps"] = reps;
  j["seed"] = seed;
  j["median"] = median(lls);
  j["sd"] = reps > 1 ? sample_sd(lls) : 0.0;
  for (std::size_t i = 0; i < model->n_params(); ++i)
    j["theta"][model->info().params[i].name] = theta[i];
  std::ofstream js(outdir + "/summary.json");
  js << j.dump(2) << '\n';
  std::cout << "median log-lik " << format_double(j["median"].get<double>()) << ", sd "
            << format_double(j["sd"].get<double>()) << '\n';
  return 0;
}

int cmd_sample(const CommonModelArgs& margs, const std::string& data_path,
               const std::string& sampler, const std::string& variant, std::size_t particles,
               double epsilon, bool exact, long iters, long burn, const std::string& mode,
               std::size_t workers, long block, std::uint64_t seed, std::uint64_t chain_id,
               const std::string& fixed, const std::string& outdir) {
  const auto model = make_model(margs.model, margs.trials);
  const auto theta0 = parse_theta(*model, margs.theta);
  const Dataset data = load_dataset(data_path);

  std::vector<std::string> fixed_names;
  if (!fixed.empty()) {
    std::size_t pos = 0;
    while (pos < fixed.size()) {
      const auto comma = fixed.find(',', pos);
      fixed_names.push_back(
          fixed.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }

  ChainConfig cfg;
  cfg.sampler = parse_sampler(sampler);
  cfg.n_iter = iters;
  cfg.burn_in = burn;
  cfg.mode = parse_mode(mode);
  cfg.workers = workers;
  cfg.block = block;
  cfg.lik.exact_kalman = exact;
  cfg.lik.filter.variant = parse_variant(variant);
  cfg.lik.filter.n_particles = particles;
  cfg.lik.filter.epsilon = epsilon;
  cfg.init_natural = theta0;
  cfg.seed = seed;
  cfg.chain_id = chain_id;

  const ParamSpace space(*model, theta0, fixed_names);
  const ChainRecord rec = run_chain(*model, model->default_prior(), data, space, cfg);
  save_chain(rec, cfg, outdir);
  std::cout << "acceptance " << format_double(rec.acceptance_pct()) << "% over "
            << (rec.natural.size() - rec.burn_in) << " post-burn iterations\n";
  return 0;
}

int cmd_evidence(const CommonModelArgs& margs, const std::string& data_path,
                 const std::string& chain_dir, std::size_t n_proposal, long thin,
                 const std::string& out, std::size_t threads) {
  const auto model = make_model(margs.model, margs.trials);
  const auto theta0 = parse_theta(*model, margs.theta);
  const Dataset data = load_dataset(data_path);
  const ChainRecord rec = load_chain(chain_dir);

  std::ifstream js(chain_dir + "/chain.json");
  const nlohmann::json meta = nlohmann::json::parse(js);
  LikelihoodSpec lik;
  lik.exact_kalman = meta.at("likelihood").at("exact_kalman").get<bool>();
  lik.filter.variant = parse_variant(meta.at("likelihood").at("variant").get<std::string>());
  lik.filter.n_particles = meta.at("likelihood").at("particles").get<std::size_t>();
  lik.filter.epsilon = meta.at("likelihood").at("epsilon").get<double>();

  std::vector<std::string> fixed_names;
  for (const auto& p : model->info().params) {
    bool free_param = false;
    for (const auto& n : rec.param_names) free_param |= (n == p.name);
    if (!free_param) fixed_names.push_back(p.name);
  }
  const ParamSpace space(*model, theta0, fixed_names);

  EvidenceOptions opts;
  opts.n_proposal = n_proposal;
  opts.thin = thin;
  opts.threads = threads;
  const EvidenceResult ev = evidence_from_chain(*model, model->default_prior(), data, space,
                                                rec, lik, opts);

  nlohmann::json j;
  j["model"] = model->info().name;
  j["data"] = data_path;
  j["chain"] = chain_dir;
  j["log_bs"] = ev.log_bs;
  j["log_is"] = ev.log_is;
  j["log_u"] = ev.log_u;
  j["n_posterior"] = ev.n_posterior;
  j["n_proposal"] = ev.n_proposal;
  j["exclusions"] = ev.exclusions;
  j["seed"] = rec.seed;
  std::ofstream out_file(out);
  out_file << j.dump(2) << '\n';
  std::cout << "log p_BS(y) = " << format_double(ev.log_bs)
            << ", log p_IS(y) = " << format_double(ev.log_is) << '\n';
  return 0;
}

int cmd_diag(const std::string& chain_dir, const std::string& out) {
  const ChainRecord rec = load_chain(chain_dir);
  const auto rows = chain_diagnostics(rec);
  write_chain_diag_csv(rows, rec.acceptance_pct(), out);
  for (const auto& row : rows)
    std::cout << row.param << ": IF " << format_double(row.inefficiency) << ", ECT "
              << format_double(row.ect) << "s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle-filter likelihood estimation and adaptive PMMH sampling"};
  app.require_subcommand(1);

  CommonModelArgs margs_sim, margs_filter, margs_sample, margs_ev;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a dataset from a model");
  long sim_T = 200;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "dataset.csv";
  add_model_options(sim, margs_sim);
  sim->add_option("--T", sim_T, "Series length");
  sim->add_option("--seed", sim_seed, "Master seed");
  sim->add_option("--out", sim_out, "Output CSV path");

  // filter
  auto* flt = app.add_subcommand("filter", "Replicate simulated log-likelihood evaluations");
  std::string flt_data, flt_variant = "sir", flt_out = "filter-out";
  std::size_t flt_M = 100, flt_threads = default_worker_count();
  double flt_eps = 0.1;
  long flt_reps = 100;
  bool flt_exact = false;
  std::uint64_t flt_seed = 1;
  add_model_options(flt, margs_filter);
  flt->add_option("--data", flt_data, "Dataset CSV")->required();
  flt->add_option("--variant", flt_variant, "sir, fapf, papf, papf-eps");
  flt->add_option("--M", flt_M, "Particle count");
  flt->add_option("--eps", flt_eps, "Epsilon for papf-eps");
  flt->add_option("--reps", flt_reps, "Replicates");
  flt->add_flag("--exact", flt_exact, "Exact Kalman likelihood (ar1 only)");
  flt->add_option("--seed", flt_seed, "Master seed");
  flt->add_option("--out", flt_out, "Output directory");
  flt->add_option("--threads", flt_threads, "Worker threads");

  // sample
  auto* smp = app.add_subcommand("sample", "Run a PMMH chain");
  std::string smp_data, smp_sampler = "aimh", smp_variant = "sir", smp_mode = "sp";
  std::string smp_fixed, smp_out = "chain-out";
  std::size_t smp_M = 100, smp_workers = default_worker_count();
  double smp_eps = 0.1;
  bool smp_exact = false;
  long smp_iters = 5000, smp_burn = 1000, smp_block = 0;
  std::uint64_t smp_seed = 1, smp_chain = 1;
  add_model_options(smp, margs_sample);
  smp->add_option("--data", smp_data, "Dataset CSV")->required();
  smp->add_option("--sampler", smp_sampler, "arwm or aimh");
  smp->add_option("--variant", smp_variant, "Filter variant");
  smp->add_option("--M", smp_M, "Particle count");
  smp->add_option("--eps", smp_eps, "Epsilon for papf-eps");
  smp->add_flag("--exact", smp_exact, "Exact Kalman likelihood (ar1 only)");
  smp->add_option("--iters", smp_iters, "Iterations");
  smp->add_option("--burn", smp_burn, "Burn-in");
  smp->add_option("--mode", smp_mode, "sp, mp1, mp2");
  smp->add_option("--J", smp_workers, "Workers for mp1/mp2");
  smp->add_option("--K", smp_block, "Proposals per worker per mp1 round (0 = schedule)");
  smp->add_option("--seed", smp_seed, "Master seed");
  smp->add_option("--chain-id", smp_chain, "Chain id (stream namespace)");
  smp->add_option("--fixed", smp_fixed, "Comma-separated parameters to hold fixed");
  smp->add_option("--out", smp_out, "Output directory");

  // evidence
  auto* evc = app.add_subcommand("evidence", "Marginal likelihood from a finished chain");
  std::string ev_data, ev_chain, ev_out = "evidence.json";
  std::size_t ev_K = 0, ev_threads = default_worker_count();
  long ev_thin = 1;
  add_model_options(evc, margs_ev);
  evc->add_option("--data", ev_data, "Dataset CSV")->required();
  evc->add_option("--chain", ev_chain, "Chain output directory")->required();
  evc->add_option("--K", ev_K, "Proposal draws (0 = match posterior draws)");
  evc->add_option("--thin", ev_thin, "Posterior thinning");
  evc->add_option("--out", ev_out, "Output JSON path");
  evc->add_option("--threads", ev_threads, "Worker threads");

  // diag
  auto* dig = app.add_subcommand("diag", "IF/ECT/acceptance table for a chain");
  std::string diag_chain, diag_out = "diag.csv";
  dig->add_option("--chain", diag_chain, "Chain output directory")->required();
  dig->add_option("--out", diag_out, "Output CSV path");

  // study
  auto* std_cmd = app.add_subcommand("study", "Run a named replication study");
  std::string study_name, study_scale = "desk", study_out = "study-out";
  std::uint64_t study_seed = 1;
  std::size_t study_threads = default_worker_count();
  long st_T = 0, st_datasets = 0, st_reps = 0, st_iters = 0;
  int st_mcmc = -1;
  std_cmd->add_option("name", study_name, "One of: ar1-high-snr, ar1-low-snr, binomial-m500, "
                                          "binomial-m100, garch, sv-evidence")
      ->required();
  std_cmd->add_option("--scale", study_scale, "smoke, desk, paper");
  std_cmd->add_option("--seed", study_seed, "Master seed");
  std_cmd->add_option("--out", study_out, "Output directory");
  std_cmd->add_option("--threads", study_threads, "Worker threads");
  std_cmd->add_option("--T", st_T, "Override series length");
  std_cmd->add_option("--datasets", st_datasets, "Override dataset count");
  std_cmd->add_option("--reps", st_reps, "Override filter replicates");
  std_cmd->add_option("--iters", st_iters, "Override chain iterations");
  std_cmd->add_option("--with-mcmc", st_mcmc, "1 to force the sampler table, 0 to skip it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage
  }

  try {
    if (sim->parsed()) return cmd_simulate(margs_sim, sim_T, sim_seed, sim_out);
    if (flt->parsed())
      return cmd_filter(margs_filter, flt_data, flt_variant, flt_M, flt_eps, flt_reps,
                        flt_exact, flt_seed, flt_out, flt_threads);
    if (smp->parsed())
      return cmd_sample(margs_sample, smp_data, smp_sampler, smp_variant, smp_M, smp_eps,
                        smp_exact, smp_iters, smp_burn, smp_mode, smp_workers, smp_block,
                        smp_seed, smp_chain, smp_fixed, smp_out);
    if (evc->parsed())
      return cmd_evidence(margs_ev, ev_data, ev_chain, ev_K, ev_thin, ev_out, ev_threads);
    if (dig->parsed()) return cmd_diag(diag_chain, diag_out);
    if (std_cmd->parsed()) {
      StudyOverrides ov;
      ov.T = st_T;
      ov.datasets = st_datasets;
      ov.reps = st_reps;
      ov.iters = st_iters;
      ov.with_mcmc = st_mcmc;
      run_study(study_name, parse_scale(study_scale), study_seed, study_out, study_threads,
                ov);
      std::cout << "study '" << study_name << "' written to " << study_out << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
