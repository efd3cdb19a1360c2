#include "pfmc/chain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "pfmc/mathutil.hpp"

namespace pfmc {

namespace {

namespace sid {
// Stream-id layout inside one chain: chain id | purpose | payload.
constexpr std::uint64_t kPfEval = 0, kProposal = 1, kAccept = 2, kEmFit = 3, kInit = 4,
                        kProbe = 5;
std::uint64_t make(std::uint64_t chain_id, std::uint64_t purpose, std::uint64_t payload) {
  return (chain_id << 48) | (purpose << 44) | payload;
}
std::uint64_t pf_eval(std::uint64_t chain_id, long iter) {
  return make(chain_id, kPfEval, static_cast<std::uint64_t>(iter) << 8);
}
}  // namespace sid

}  // namespace

double eval_loglik(const Model& model, std::span<const double> theta, const Dataset& data,
                   const LikelihoodSpec& lik, std::uint64_t seed, std::uint64_t stream_base,
                   std::size_t threads) {
  if (lik.exact_kalman) {
    if (model.info().name != "ar1")
      throw ConfigError("exact likelihood is only available for the ar1 model");
    return kalman_loglik(theta, data.y);
  }
  if (lik.mp2_workers > 1)
    return mp2_loglik(model, theta, data, lik.filter, seed, stream_base, lik.mp2_workers,
                      threads);
  RandomStream rs(seed, stream_base);
  return run_filter(model, theta, data, lik.filter, rs).total_loglik;
}

ParamSpace::ParamSpace(const Model& model, std::vector<double> reference,
                       const std::vector<std::string>& fixed_names)
    : metas_(model.info().params), reference_(std::move(reference)) {
  if (reference_.size() != metas_.size())
    throw ConfigError("ParamSpace: reference has wrong dimension");
  std::vector<bool> fixed(metas_.size(), false);
  for (const auto& name : fixed_names) fixed[model.param_index(name)] = true;
  for (std::size_t i = 0; i < metas_.size(); ++i) {
    if (fixed[i]) continue;
    free_idx_.push_back(static_cast<int>(i));
    free_names_.push_back(metas_[i].name);
  }
  if (free_idx_.empty()) throw ConfigError("ParamSpace: no free parameters");
}

Eigen::VectorXd ParamSpace::pack(std::span<const double> natural) const {
  if (natural.size() != metas_.size()) throw ConfigError("ParamSpace::pack: bad dimension");
  Eigen::VectorXd z(dim());
  for (int i = 0; i < dim(); ++i)
    z[i] = to_unconstrained(metas_[free_idx_[i]].transform, natural[free_idx_[i]]);
  return z;
}

std::vector<double> ParamSpace::unpack(const Eigen::VectorXd& z) const {
  if (z.size() != dim()) throw ConfigError("ParamSpace::unpack: bad dimension");
  std::vector<double> natural = reference_;
  for (int i = 0; i < dim(); ++i)
    natural[free_idx_[i]] = from_unconstrained(metas_[free_idx_[i]].transform, z[i]);
  return natural;
}

double ParamSpace::log_jacobian(std::span<const double> natural) const {
  double lj = 0.0;
  for (int idx : free_idx_) lj += pfmc::log_jacobian(metas_[idx].transform, natural[idx]);
  return lj;
}

std::vector<double> ParamSpace::assemble(std::span<const double> free_natural) const {
  if (free_natural.size() != free_idx_.size())
    throw ConfigError("ParamSpace::assemble: bad dimension");
  std::vector<double> natural = reference_;
  for (std::size_t i = 0; i < free_idx_.size(); ++i)
    natural[free_idx_[i]] = free_natural[i];
  return natural;
}

SamplerKind parse_sampler(const std::string& s) {
  if (s == "arwm") return SamplerKind::Arwm;
  if (s == "aimh") return SamplerKind::Aimh;
  throw ConfigError("unknown sampler '" + s + "'");
}

ParallelMode parse_mode(const std::string& s) {
  if (s == "sp") return ParallelMode::SingleProcessor;
  if (s == "mp1") return ParallelMode::Mp1;
  if (s == "mp2") return ParallelMode::Mp2;
  throw ConfigError("unknown parallel mode '" + s + "'");
}

double ChainRecord::acceptance_pct() const {
  long n = 0, acc = 0;
  for (std::size_t j = static_cast<std::size_t>(burn_in); j < accepted.size(); ++j) {
    ++n;
    acc += accepted[j] ? 1 : 0;
  }
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(acc) / static_cast<double>(n);
}

std::vector<double> ChainRecord::column(std::size_t param, bool post_burn) const {
  std::vector<double> col;
  const std::size_t start = post_burn ? static_cast<std::size_t>(burn_in) : 0;
  for (std::size_t j = start; j < natural.size(); ++j) col.push_back(natural[j][param]);
  return col;
}

double mh_log_alpha(double current_target, double proposed_target, double log_q_ratio) {
  if (std::isnan(proposed_target) || proposed_target == kNegInf) return kNegInf;
  return std::min(0.0, proposed_target - current_target + log_q_ratio);
}

bool mh_accept(double current_target, double proposed_target, double log_q_ratio,
               RandomStream& rs) {
  const double la = mh_log_alpha(current_target, proposed_target, log_q_ratio);
  if (la == kNegInf) return false;
  return std::log(rs.uniform()) < la;
}

namespace {

struct CurrentState {
  Eigen::VectorXd z;
  std::vector<double> natural;
  double log_lik = 0.0;
  double log_target = 0.0;
  std::uint64_t pf_stream = 0;
};

// Surrogate for the p/q <= C ergodicity bound: probes the bulk of the prior
// and warns when the final mixture leaves it badly uncovered. Diffuse priors
// cannot be dominated by a posterior-shaped normal mixture, so this is a
// diagnostic, not a gate.
void warn_if_prior_uncovered(const PriorSpec& prior, const ParamSpace& space,
                             const ProposalMixture& prop, std::uint64_t seed,
                             std::uint64_t chain_id) {
  RandomStream rs(seed, sid::make(chain_id, sid::kProbe, 0));
  std::vector<std::pair<double, double>> probes;  // (log prior+jac, log q)
  for (int i = 0; i < 200; ++i) {
    std::vector<double> draw;
    try {
      draw = prior.sample(rs);
    } catch (const std::exception&) {
      return;
    }
    bool finite = true;
    for (double v : draw) finite = finite && std::isfinite(v);
    if (!finite) continue;
    Eigen::VectorXd z;
    try {
      z = space.pack(draw);
    } catch (const TransformError&) {
      continue;
    }
    const std::vector<double> nat = space.unpack(z);
    const double lpj = prior.log_pdf(nat) + space.log_jacobian(nat);
    if (!std::isfinite(lpj)) continue;
    probes.emplace_back(lpj, prop.log_pdf(z));
  }
  if (probes.size() < 20) return;
  std::vector<double> lps;
  for (const auto& p : probes) lps.push_back(p.first);
  const double bulk = quantile(lps, 0.25);
  double worst = kNegInf;
  for (const auto& p : probes)
    if (p.first >= bulk) worst = std::max(worst, p.first - p.second);
  if (worst > std::log(1e6))
    std::cerr << "pfmc: warning: the adaptive proposal leaves prior-bulk regions "
                 "essentially uncovered (max log p/q = "
              << worst << "); the independence-sampler domination bound is not "
                          "established for this configuration\n";
}

}  // namespace

ChainRecord run_chain(const Model& model, const PriorSpec& prior, const Dataset& data,
                      const ParamSpace& space, const ChainConfig& cfg) {
  if (cfg.n_iter < 1) throw ConfigError("run_chain: n_iter must be positive");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.n_iter)
    throw ConfigError("run_chain: burn_in must lie in [0, n_iter)");
  if (cfg.mode == ParallelMode::Mp1 && cfg.sampler != SamplerKind::Aimh)
    throw ConfigError("MP1 requires an independence proposal (aimh)");
  if (cfg.workers < 1) throw ConfigError("run_chain: workers must be at least 1");

  const int d = space.dim();
  LikelihoodSpec lik = cfg.lik;
  if (cfg.mode == ParallelMode::Mp2) lik.mp2_workers = cfg.workers;
  const std::size_t eval_threads = cfg.mode == ParallelMode::SingleProcessor ? 1 : cfg.workers;

  std::vector<double> theta0 =
      cfg.init_natural.empty() ? model.default_theta() : cfg.init_natural;
  if (theta0.size() != model.n_params())
    throw ConfigError("run_chain: init has wrong dimension");
  if (!prior.in_support(theta0))
    throw ConfigError("run_chain: initial point is outside the prior support");

  ChainRecord rec;
  rec.param_names = space.free_names();
  rec.burn_in = cfg.burn_in;
  rec.seed = cfg.seed;
  rec.chain_id = cfg.chain_id;
  rec.natural.reserve(cfg.n_iter);
  rec.z.reserve(cfg.n_iter);

  RandomStream rs_prop(cfg.seed, sid::make(cfg.chain_id, sid::kProposal, 0));
  RandomStream rs_accept(cfg.seed, sid::make(cfg.chain_id, sid::kAccept, 0));

  CurrentState cur;
  cur.natural = theta0;
  cur.z = space.pack(theta0);
  cur.pf_stream = sid::make(cfg.chain_id, sid::kInit, 0);
  cur.log_lik = eval_loglik(model, cur.natural, data, lik, cfg.seed, cur.pf_stream,
                            eval_threads);
  cur.log_target =
      cur.log_lik + prior.log_pdf(cur.natural) + space.log_jacobian(cur.natural);
  if (!std::isfinite(cur.log_target))
    throw ConfigError("run_chain: initial point has a degenerate target");

  auto record_state = [&](bool accepted_flag) {
    std::vector<double> free_nat(rec.param_names.size());
    const auto full = cur.natural;
    for (std::size_t i = 0, f = 0; i < model.n_params(); ++i) {
      if (f < rec.param_names.size() && model.info().params[i].name == rec.param_names[f])
        free_nat[f++] = full[i];
    }
    rec.natural.push_back(std::move(free_nat));
    rec.z.push_back(cur.z);
    rec.log_target.push_back(cur.log_target);
    rec.log_lik.push_back(cur.log_lik);
    rec.accepted.push_back(accepted_flag ? 1 : 0);
    rec.pf_streams.push_back(cur.pf_stream);
  };

  const auto t_start = std::chrono::steady_clock::now();

  if (cfg.sampler == SamplerKind::Arwm) {
    ArwmState arwm(d, cfg.arwm_j0);
    for (long j = 1; j <= cfg.n_iter; ++j) {
      const Eigen::VectorXd zp = arwm.propose(cur.z, rs_prop);
      const std::vector<double> natp = space.unpack(zp);
      const double lpp = prior.log_pdf(natp) + space.log_jacobian(natp);
      const std::uint64_t pf_sid = sid::pf_eval(cfg.chain_id, j);
      double llp = kNegInf;
      if (lpp > kNegInf)
        llp = eval_loglik(model, natp, data, lik, cfg.seed, pf_sid, eval_threads);
      const double targetp = llp + lpp;
      const bool acc = mh_accept(cur.log_target, targetp, 0.0, rs_accept);
      if (acc) cur = CurrentState{zp, natp, llp, targetp, pf_sid};
      record_state(acc);
      arwm.record(cur.z);
    }
  } else {
    // Initial proposal estimate: supplied, or moments of an ARWM warm run.
    GaussianMixture g1;
    if (cfg.init_proposal) {
      g1 = *cfg.init_proposal;
    } else {
      ChainConfig warm = cfg;
      warm.sampler = SamplerKind::Arwm;
      warm.n_iter = std::max<long>(cfg.warm_iters, 10 * d + 10);
      warm.burn_in = std::min<long>(cfg.warm_burn, warm.n_iter - 10 * d - 1);
      warm.mode = ParallelMode::SingleProcessor;
      warm.workers = 1;
      warm.chain_id = cfg.chain_id + 0x4000;
      warm.init_proposal.reset();
      const ChainRecord wr = run_chain(model, prior, data, space, warm);
      Eigen::MatrixXd rows(wr.z.size() - warm.burn_in, d);
      for (long i = warm.burn_in; i < static_cast<long>(wr.z.size()); ++i)
        rows.row(i - warm.burn_in) = wr.z[i].transpose();
      g1 = fit_mixture(rows, 1, RandomStream(cfg.seed, sid::make(cfg.chain_id, sid::kEmFit,
                                                                 0xFFF)));
    }
    ProposalMixture prop(g1, cfg.w_pre[0], cfg.w_pre[1]);
    AimhSchedule sched =
        cfg.schedule.checkpoints.empty() && cfg.schedule.stage2_at < 0
            ? AimhSchedule::for_run(cfg.n_iter)
            : cfg.schedule;

    const long J = cfg.mode == ParallelMode::Mp1 ? static_cast<long>(cfg.workers) : 1;
    const long K = cfg.mode == ParallelMode::Mp1 ? cfg.block : 1;

    Eigen::MatrixXd draws(cfg.n_iter, d);
    long accepted_total = 0;
    long refit_counter = 0;

    auto next_boundary = [&](long j) {
      long nb = cfg.n_iter;
      for (long c : sched.checkpoints)
        if (c > j) {
          nb = std::min(nb, c);
          break;
        }
      if (sched.stage2_at > j) nb = std::min(nb, sched.stage2_at);
      return nb;
    };

    struct Proposal {
      Eigen::VectorXd z;
      std::vector<double> natural;
      double log_prior_jac = 0.0;
      double log_q = 0.0;
      std::uint64_t pf_stream = 0;
    };

    long j = 0;
    while (j < cfg.n_iter) {
      long round_len = cfg.mode == ParallelMode::Mp1
                           ? (K > 0 ? J * K : next_boundary(j) - j)
                           : next_boundary(j) - j;
      if (cfg.mode != ParallelMode::Mp1) round_len = 1;
      round_len = std::min(round_len, cfg.n_iter - j);

      // Proposals are drawn serially from the frozen mixture, then their
      // likelihoods evaluated concurrently; selection is a serial pass
      // consuming only acceptance uniforms. The chain is therefore
      // identical to the serial replay of the same proposal list.
      std::vector<Proposal> props(round_len);
      for (long i = 0; i < round_len; ++i) {
        props[i].z = prop.sample(rs_prop);
        props[i].natural = space.unpack(props[i].z);
        props[i].log_prior_jac =
            prior.log_pdf(props[i].natural) + space.log_jacobian(props[i].natural);
        props[i].log_q = prop.log_pdf(props[i].z);
        props[i].pf_stream = sid::pf_eval(cfg.chain_id, j + i + 1);
      }
      const auto lls =
          parallel_map(eval_threads, static_cast<std::size_t>(round_len), [&](std::size_t i) {
            if (props[i].log_prior_jac == kNegInf) return kNegInf;
            return eval_loglik(model, props[i].natural, data, lik, cfg.seed,
                               props[i].pf_stream, 1);
          });

      double cur_logq = prop.log_pdf(cur.z);
      for (long i = 0; i < round_len; ++i) {
        const double targetp = lls[i] + props[i].log_prior_jac;
        const bool acc =
            mh_accept(cur.log_target, targetp, cur_logq - props[i].log_q, rs_accept);
        if (acc) {
          cur = CurrentState{props[i].z, props[i].natural, lls[i], targetp,
                             props[i].pf_stream};
          cur_logq = props[i].log_q;
          ++accepted_total;
        }
        record_state(acc);
        draws.row(j) = cur.z.transpose();
        ++j;
      }

      // Adaptation only at round boundaries.
      const long round_start = j - round_len;
      if (sched.stage2_at > round_start && sched.stage2_at <= j) prop.begin_stage2();
      bool crossed = false;
      long last_cp = 0;
      for (long c : sched.checkpoints)
        if (c > round_start && c <= j) {
          crossed = true;
          last_cp = c;
        }
      if (crossed) {
        const auto decision = aimh_update_schedule(last_cp, accepted_total, d, sched);
        try {
          GaussianMixture g3 = fit_mixture(
              draws.topRows(j), decision.components,
              RandomStream(cfg.seed, sid::make(cfg.chain_id, sid::kEmFit,
                                               static_cast<std::uint64_t>(refit_counter))));
          prop.set_adapted(std::move(g3), cfg.w_post);
          ++refit_counter;
        } catch (const FitError&) {
          // not enough draws yet; keep the previous adapted group
        }
      }
    }
    warn_if_prior_uncovered(prior, space, prop, cfg.seed, cfg.chain_id);
    rec.proposal = std::move(prop);
  }

  const auto t_end = std::chrono::steady_clock::now();
  rec.seconds = std::chrono::duration<double>(t_end - t_start).count();
  rec.seconds_per_iter = rec.seconds / static_cast<double>(cfg.n_iter);
  return rec;
}

namespace {

nlohmann::json mixture_to_json(const GaussianMixture& g) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : g.components()) {
    nlohmann::json jc;
    jc["weight"] = c.weight;
    jc["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size());
    std::vector<std::vector<double>> cov(c.cov.rows(), std::vector<double>(c.cov.cols()));
    for (long i = 0; i < c.cov.rows(); ++i)
      for (long k = 0; k < c.cov.cols(); ++k) cov[i][k] = c.cov(i, k);
    jc["cov"] = cov;
    comps.push_back(jc);
  }
  return comps;
}

GaussianMixture mixture_from_json(const nlohmann::json& j) {
  std::vector<GaussianMixture::Component> comps;
  for (const auto& jc : j) {
    GaussianMixture::Component c;
    c.weight = jc.at("weight").get<double>();
    const auto mean = jc.at("mean").get<std::vector<double>>();
    c.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
    const auto cov = jc.at("cov").get<std::vector<std::vector<double>>>();
    c.cov.resize(cov.size(), cov.size());
    for (std::size_t r = 0; r < cov.size(); ++r)
      for (std::size_t k = 0; k < cov.size(); ++k) c.cov(r, k) = cov[r][k];
    comps.push_back(std::move(c));
  }
  return GaussianMixture(std::move(comps));
}

}  // namespace

void save_chain(const ChainRecord& rec, const ChainConfig& cfg, const std::string& dir,
                bool include_timings) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir + "/chain.csv");
    if (!csv) throw ConfigError("cannot write " + dir + "/chain.csv");
    csv << "j,accepted,log_target,log_lik,pf_stream";
    for (const auto& n : rec.param_names) csv << ',' << n;
    for (const auto& n : rec.param_names) csv << ",z_" << n;
    csv << '\n';
    for (std::size_t j = 0; j < rec.natural.size(); ++j) {
      csv << (j + 1) << ',' << static_cast<int>(rec.accepted[j]) << ','
          << format_double(rec.log_target[j]) << ',' << format_double(rec.log_lik[j]) << ','
          << rec.pf_streams[j];
      for (double v : rec.natural[j]) csv << ',' << format_double(v);
      for (long i = 0; i < rec.z[j].size(); ++i) csv << ',' << format_double(rec.z[j][i]);
      csv << '\n';
    }
  }

  nlohmann::json meta;
  meta["seed"] = rec.seed;
  meta["chain_id"] = rec.chain_id;
  meta["burn_in"] = rec.burn_in;
  meta["n_iter"] = rec.natural.size();
  meta["param_names"] = rec.param_names;
  meta["acceptance_pct"] = rec.acceptance_pct();
  meta["sampler"] = cfg.sampler == SamplerKind::Arwm ? "arwm" : "aimh";
  meta["mode"] = cfg.mode == ParallelMode::SingleProcessor
                     ? "sp"
                     : (cfg.mode == ParallelMode::Mp1 ? "mp1" : "mp2");
  meta["workers"] = cfg.workers;
  meta["block"] = cfg.block;
  meta["likelihood"] = {{"exact_kalman", cfg.lik.exact_kalman},
                        {"variant", variant_name(cfg.lik.filter.variant)},
                        {"particles", cfg.lik.filter.n_particles},
                        {"epsilon", cfg.lik.filter.epsilon},
                        {"mp2_workers", cfg.lik.mp2_workers}};
  if (include_timings) {
    meta["seconds"] = rec.seconds;
    meta["seconds_per_iter"] = rec.seconds_per_iter;
  }
  if (rec.proposal) {
    nlohmann::json jp;
    jp["stage"] = rec.proposal->stage();
    jp["weights"] = {rec.proposal->weights()[0], rec.proposal->weights()[1],
                     rec.proposal->weights()[2], rec.proposal->weights()[3]};
    for (int g = 1; g <= 4; ++g) {
      const auto& gm = rec.proposal->group(g);
      jp["g" + std::to_string(g)] = gm.empty() ? nlohmann::json::array() : mixture_to_json(gm);
    }
    meta["proposal"] = jp;
  }
  std::ofstream js(dir + "/chain.json");
  if (!js) throw ConfigError("cannot write " + dir + "/chain.json");
  js << meta.dump(2) << '\n';
}

ChainRecord load_chain(const std::string& dir) {
  std::ifstream js(dir + "/chain.json");
  if (!js) throw IngestError("cannot open " + dir + "/chain.json", 0);
  nlohmann::json meta = nlohmann::json::parse(js);

  ChainRecord rec;
  rec.seed = meta.at("seed").get<std::uint64_t>();
  rec.chain_id = meta.at("chain_id").get<std::uint64_t>();
  rec.burn_in = meta.at("burn_in").get<long>();
  rec.param_names = meta.at("param_names").get<std::vector<std::string>>();
  if (meta.contains("seconds")) rec.seconds = meta["seconds"].get<double>();
  if (meta.contains("seconds_per_iter"))
    rec.seconds_per_iter = meta["seconds_per_iter"].get<double>();

  if (meta.contains("proposal")) {
    const auto& jp = meta["proposal"];
    GaussianMixture g1 = mixture_from_json(jp.at("g1"));
    const auto w = jp.at("weights").get<std::vector<double>>();
    ProposalMixture prop(std::move(g1), w[0], w[1]);
    if (!jp.at("g3").empty()) {
      const double weights[4] = {w[0], w[1], w[2], w[3]};
      prop.set_adapted(mixture_from_json(jp.at("g3")), weights);
    }
    // g1 as saved already reflects any stage-2 promotion.
    prop.restore_stage(jp.at("stage").get<int>());
    rec.proposal = std::move(prop);
  }

  std::ifstream csv(dir + "/chain.csv");
  if (!csv) throw IngestError("cannot open " + dir + "/chain.csv", 0);
  std::string line;
  std::getline(csv, line);  // header
  const std::size_t d = rec.param_names.size();
  long lineno = 1;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != 5 + 2 * d) throw IngestError("bad chain row", lineno);
    try {
      rec.accepted.push_back(static_cast<char>(std::stoi(cells[1])));
      rec.log_target.push_back(std::stod(cells[2]));
      rec.log_lik.push_back(std::stod(cells[3]));
      rec.pf_streams.push_back(std::stoull(cells[4]));
      std::vector<double> nat(d);
      Eigen::VectorXd z(static_cast<long>(d));
      for (std::size_t i = 0; i < d; ++i) nat[i] = std::stod(cells[5 + i]);
      for (std::size_t i = 0; i < d; ++i) z[static_cast<long>(i)] = std::stod(cells[5 + d + i]);
      rec.natural.push_back(std::move(nat));
      rec.z.push_back(std::move(z));
    } catch (const std::exception&) {
      throw IngestError("malformed chain row", lineno);
    }
  }
  return rec;
}

}  // namespace pfmc
