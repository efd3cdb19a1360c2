#include "pfmc/studies.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "pfmc/diagnostics.hpp"
#include "pfmc/evidence.hpp"
#include "pfmc/mathutil.hpp"

namespace pfmc {

namespace {

struct ScaleParams {
  long T;
  long datasets;
  long reps;
  long iters;
  long burn;
  long warm;
};

ScaleParams scale_params(StudyScale s) {
  switch (s) {
    case StudyScale::Smoke: return {50, 2, 20, 300, 50, 100};
    case StudyScale::Desk: return {200, 10, 200, 5000, 1000, 2000};
    case StudyScale::Paper: return {500, 50, 1000, 30000, 5000, 5000};
  }
  throw ConfigError("unknown scale");
}

std::string scale_name(StudyScale s) {
  switch (s) {
    case StudyScale::Smoke: return "smoke";
    case StudyScale::Desk: return "desk";
    case StudyScale::Paper: return "paper";
  }
  return "?";
}

struct StudyContext {
  std::string name;
  StudyScale scale;
  ScaleParams params;
  bool with_mcmc = true;
  std::uint64_t seed;
  std::string outdir;
  std::size_t threads;
};

std::vector<Dataset> simulate_datasets(const Model& model, std::span<const double> theta,
                                       const StudyContext& ctx) {
  std::filesystem::create_directories(ctx.outdir + "/datasets");
  std::vector<Dataset> datasets;
  for (long d = 0; d < ctx.params.datasets; ++d) {
    RandomStream rs(ctx.seed, (0xDA7Aull << 32) | static_cast<std::uint64_t>(d));
    Dataset ds = model.simulate(theta, ctx.params.T, rs);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ds_%03ld.csv", d + 1);
    ds.name = buf;
    ds.meta["stream_tag"] = static_cast<double>(d);
    write_dataset(ds, ctx.outdir + "/datasets/" + buf);
    datasets.push_back(std::move(ds));
  }
  return datasets;
}

SdStudyCell sir_cell(std::size_t particles) {
  SdStudyCell cell;
  cell.label = "sir-" + std::to_string(particles);
  cell.lik.filter.variant = FilterVariant::Sir;
  cell.lik.filter.n_particles = particles;
  return cell;
}

SdStudyCell adapted_cell(FilterVariant v, std::size_t particles) {
  SdStudyCell cell;
  cell.label = variant_name(v) + "-" + std::to_string(particles);
  cell.lik.filter.variant = v;
  cell.lik.filter.n_particles = particles;
  return cell;
}

/// Sampler comparison across the study's datasets: one chain per dataset,
/// summarized by medians and IQRs of acceptance rate and per-parameter IF.
void mcmc_table(const StudyContext& ctx, const Model& model, const PriorSpec& prior,
                std::span<const Dataset> datasets, std::span<const double> theta_true,
                const std::vector<std::pair<std::string, ChainConfig>>& samplers,
                const std::string& path) {
  std::ofstream out(ctx.outdir + "/" + path);
  if (!out) throw ConfigError("cannot write mcmc table");
  out << "sampler,accept_median,accept_iqr";
  const ParamSpace space(model, std::vector<double>(theta_true.begin(), theta_true.end()));
  for (const auto& n : space.free_names()) out << ",if_" << n << "_median,if_" << n << "_iqr";
  out << '\n';

  std::uint64_t chain_counter = 1;
  for (const auto& [label, base_cfg] : samplers) {
    std::vector<double> accepts;
    std::vector<std::vector<double>> ifs(space.free_names().size());
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      ChainConfig cfg = base_cfg;
      cfg.seed = ctx.seed;
      cfg.chain_id = chain_counter++;
      const ChainRecord rec = run_chain(model, prior, datasets[d], space, cfg);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "chains/%s_ds%03zu", label.c_str(), d + 1);
      save_chain(rec, cfg, ctx.outdir + "/" + buf, /*include_timings=*/false);
      accepts.push_back(rec.acceptance_pct());
      for (std::size_t p = 0; p < ifs.size(); ++p)
        ifs[p].push_back(inefficiency(rec.column(p)));
    }
    out << label << ',' << format_double(median(accepts)) << ','
        << format_double(iqr(accepts));
    for (auto& col : ifs)
      out << ',' << format_double(median(col)) << ',' << format_double(iqr(col));
    out << '\n';
  }
}

void write_config(const StudyContext& ctx, const Model& model,
                  std::span<const double> theta, const nlohmann::json& extra) {
  nlohmann::json j;
  j["study"] = ctx.name;
  j["scale"] = scale_name(ctx.scale);
  j["seed"] = ctx.seed;
  j["T"] = ctx.params.T;
  j["datasets"] = ctx.params.datasets;
  j["reps"] = ctx.params.reps;
  j["iters"] = ctx.params.iters;
  j["burn"] = ctx.params.burn;
  j["warm"] = ctx.params.warm;
  j["with_mcmc"] = ctx.with_mcmc;
  j["model"] = model.info().name;
  for (std::size_t i = 0; i < model.n_params(); ++i)
    j["theta_true"][model.info().params[i].name] = theta[i];
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  std::ofstream out(ctx.outdir + "/config.json");
  out << j.dump(2) << '\n';
}

ChainConfig chain_base(const StudyContext& ctx, SamplerKind kind, FilterVariant variant,
                       std::size_t particles, std::span<const double> init) {
  ChainConfig cfg;
  cfg.sampler = kind;
  cfg.n_iter = ctx.params.iters;
  cfg.burn_in = ctx.params.burn;
  cfg.warm_iters = ctx.params.warm;
  cfg.warm_burn = std::max<long>(ctx.params.warm / 4, 10);
  cfg.lik.filter.variant = variant;
  cfg.lik.filter.n_particles = particles;
  cfg.init_natural.assign(init.begin(), init.end());
  return cfg;
}

void study_ar1(const StudyContext& ctx, double sigma2) {
  const auto model = make_model("ar1");
  const std::vector<double> theta = {0.0, 0.6, 1.0, sigma2};
  write_config(ctx, *model, theta, {{"sigma2", sigma2}});
  const auto datasets = simulate_datasets(*model, theta, ctx);

  std::vector<SdStudyCell> cells;
  for (std::size_t m : {100u, 500u, 1000u, 2000u}) cells.push_back(sir_cell(m));
  cells.push_back(adapted_cell(FilterVariant::Fapf, 100));
  {
    SdStudyCell exact;
    exact.label = "kalman";
    exact.lik.exact_kalman = true;
    cells.push_back(exact);
  }
  const auto report =
      loglik_sd_study(*model, theta, datasets, cells, ctx.params.reps, ctx.seed, ctx.threads);
  write_sd_report_csv(report, ctx.outdir + "/sd_table.csv");

  if (ctx.with_mcmc) {
    std::vector<std::pair<std::string, ChainConfig>> samplers;
    samplers.emplace_back("aimh-fapf-100", chain_base(ctx, SamplerKind::Aimh,
                                                      FilterVariant::Fapf, 100, theta));
    samplers.emplace_back("arwm-fapf-100", chain_base(ctx, SamplerKind::Arwm,
                                                      FilterVariant::Fapf, 100, theta));
    mcmc_table(ctx, *model, model->default_prior(), datasets, theta, samplers,
               "mcmc_table.csv");
  }
}

void study_binomial(const StudyContext& ctx, long trials) {
  const auto model = make_model("binomial", trials);
  const std::vector<double> theta = {0.0, 0.97, 0.25};
  write_config(ctx, *model, theta, {{"trials", trials}});
  const auto datasets = simulate_datasets(*model, theta, ctx);

  std::vector<SdStudyCell> cells;
  for (std::size_t m : {500u, 1000u, 2000u, 4000u}) cells.push_back(sir_cell(m));
  for (std::size_t m : {100u, 200u, 500u}) cells.push_back(adapted_cell(FilterVariant::Papf, m));
  const auto report =
      loglik_sd_study(*model, theta, datasets, cells, ctx.params.reps, ctx.seed, ctx.threads);
  write_sd_report_csv(report, ctx.outdir + "/sd_table.csv");

  if (ctx.with_mcmc) {
    std::vector<std::pair<std::string, ChainConfig>> samplers;
    samplers.emplace_back("aimh-papf-200", chain_base(ctx, SamplerKind::Aimh,
                                                      FilterVariant::Papf, 200, theta));
    mcmc_table(ctx, *model, model->default_prior(), datasets, theta, samplers,
               "mcmc_table.csv");
  }
}

void study_garch(const StudyContext& ctx) {
  const auto model = make_model("garch");
  const std::vector<double> theta = model->default_theta();
  write_config(ctx, *model, theta, {});
  const auto datasets = simulate_datasets(*model, theta, ctx);

  std::vector<SdStudyCell> cells;
  for (std::size_t m : {1000u, 5000u, 10000u}) cells.push_back(sir_cell(m));
  for (std::size_t m : {200u, 500u, 1000u})
    cells.push_back(adapted_cell(FilterVariant::Fapf, m));
  const auto report =
      loglik_sd_study(*model, theta, datasets, cells, ctx.params.reps, ctx.seed, ctx.threads);
  write_sd_report_csv(report, ctx.outdir + "/sd_table.csv");

  if (ctx.with_mcmc) {
    std::vector<std::pair<std::string, ChainConfig>> samplers;
    samplers.emplace_back("aimh-fapf-500", chain_base(ctx, SamplerKind::Aimh,
                                                      FilterVariant::Fapf, 500, theta));
    samplers.emplace_back("arwm-fapf-500", chain_base(ctx, SamplerKind::Arwm,
                                                      FilterVariant::Fapf, 500, theta));
    mcmc_table(ctx, *model, model->default_prior(), datasets, theta, samplers,
               "mcmc_table.csv");
  }
}

/// Fits the four SV variants to one series simulated from the leverage
/// model and compares their marginal likelihoods.
void study_sv_evidence(const StudyContext& ctx) {
  const auto gen_model = make_model("sv-lev");
  const std::vector<double> theta_gen = {-0.5, 0.97, 0.04, -0.75};
  write_config(ctx, *gen_model, theta_gen, {});

  std::filesystem::create_directories(ctx.outdir + "/datasets");
  RandomStream rs(ctx.seed, 0xDA7Aull << 32);
  Dataset data = gen_model->simulate(theta_gen, ctx.params.T, rs);
  data.name = "ds_001.csv";
  write_dataset(data, ctx.outdir + "/datasets/ds_001.csv");

  const std::size_t particles = ctx.scale == StudyScale::Smoke ? 100 : 500;

  std::ofstream out(ctx.outdir + "/evidence_table.csv");
  out << "model,log_bs,log_is,n_posterior,n_proposal,exclusions\n";

  std::uint64_t chain_counter = 1;
  for (const std::string name : {"sv", "sv-lev", "sv-out", "sv-lev-out"}) {
    const auto model = make_model(name);
    std::vector<double> init = model->default_theta();
    init[0] = theta_gen[0];
    init[1] = theta_gen[1];
    init[2] = theta_gen[2];

    ChainConfig cfg = chain_base(ctx, SamplerKind::Aimh, FilterVariant::Sir, particles, init);
    cfg.seed = ctx.seed;
    cfg.chain_id = chain_counter++;
    const ParamSpace space(*model, init);
    const PriorSpec prior = model->default_prior();
    const ChainRecord rec = run_chain(*model, prior, data, space, cfg);
    save_chain(rec, cfg, ctx.outdir + "/chains/" + name, /*include_timings=*/false);

    EvidenceOptions eopts;
    eopts.threads = ctx.threads;
    eopts.n_proposal = std::min<std::size_t>(rec.z.size() - cfg.burn_in, 2000);
    const EvidenceResult ev =
        evidence_from_chain(*model, prior, data, space, rec, cfg.lik, eopts);
    out << name << ',' << format_double(ev.log_bs) << ',' << format_double(ev.log_is) << ','
        << ev.n_posterior << ',' << ev.n_proposal << ',' << ev.exclusions << '\n';
  }
}

}  // namespace

StudyScale parse_scale(const std::string& s) {
  if (s == "smoke") return StudyScale::Smoke;
  if (s == "desk") return StudyScale::Desk;
  if (s == "paper") return StudyScale::Paper;
  throw ConfigError("unknown scale '" + s + "' (smoke|desk|paper)");
}

std::vector<std::string> study_names() {
  return {"ar1-high-snr", "ar1-low-snr", "binomial-m500", "binomial-m100",
          "garch",        "sv-evidence"};
}

void run_study(const std::string& name, StudyScale scale, std::uint64_t seed,
               const std::string& outdir, std::size_t threads,
               const StudyOverrides& overrides) {
  StudyContext ctx;
  ctx.name = name;
  ctx.scale = scale;
  ctx.params = scale_params(scale);
  ctx.seed = seed;
  ctx.outdir = outdir;
  ctx.threads = threads;
  if (overrides.T > 0) ctx.params.T = overrides.T;
  if (overrides.datasets > 0) ctx.params.datasets = overrides.datasets;
  if (overrides.reps > 0) ctx.params.reps = overrides.reps;
  if (overrides.iters > 0) {
    ctx.params.iters = overrides.iters;
    ctx.params.burn = overrides.iters / 5;
    ctx.params.warm = std::max<long>(overrides.iters / 2, 120);
  }
  if (overrides.with_mcmc >= 0) ctx.with_mcmc = overrides.with_mcmc != 0;

  std::filesystem::create_directories(outdir);
  if (name == "ar1-high-snr") return study_ar1(ctx, 0.01);
  if (name == "ar1-low-snr") return study_ar1(ctx, 1.0);
  if (name == "binomial-m500") return study_binomial(ctx, 500);
  if (name == "binomial-m100") return study_binomial(ctx, 100);
  if (name == "garch") return study_garch(ctx);
  if (name == "sv-evidence") return study_sv_evidence(ctx);
  throw ConfigError("unknown study '" + name + "'");
}

}  // namespace pfmc
