#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "seqdc/combinatorics.hpp"
#include "seqdc/serialize.hpp"
#include "seqdc/survey.hpp"
#include "seqdc/util.hpp"

using seqdc::AdamConfig;
using seqdc::BinarySequence;
using seqdc::Json;

namespace {

void emit(const Json& j, const std::string& format) {
  if (format == "human")
    std::cout << j.dump(2) << "\n";
  else
    std::cout << j.dump() << "\n";
}

Json adam_to_json(const AdamConfig& c) {
  return Json{{"learning_rate", c.learning_rate},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"epsilon", c.epsilon},
              {"max_iterations", c.max_iterations},
              {"restarts", c.restarts},
              {"convergence_tol", c.convergence_tol},
              {"fd_step", c.fd_step},
              {"seed", c.rng_seed},
              {"jobs", c.jobs}};
}

void apply_config_file(AdamConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  const Json j = Json::parse(in);
  if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
  if (j.contains("beta2")) c.beta2 = j.at("beta2").get<double>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<int>();
  if (j.contains("restarts")) c.restarts = j.at("restarts").get<int>();
  if (j.contains("convergence_tol")) c.convergence_tol = j.at("convergence_tol").get<double>();
  if (j.contains("fd_step")) c.fd_step = j.at("fd_step").get<double>();
  if (j.contains("seed")) c.rng_seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();
}

// Sentinel-based optimizer flags shared by every subcommand that runs Adam.
// Resolution order: built-in defaults, then --config file, then explicit flags.
struct AdamFlags {
  int restarts = -1;
  int iters = -1;
  double lr = -1.0;
  double tol = -1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = -1;
  std::string config_path;

  void attach(CLI::App* sub) {
    sub->add_option("--restarts", restarts, "number of random restarts");
    sub->add_option("--iters", iters, "iteration cap per restart");
    sub->add_option("--lr", lr, "Adam learning rate");
    sub->add_option("--tol", tol, "convergence tolerance, 0 runs every iteration");
    sub->add_option("--seed", seed, "base RNG seed")->each([this](const std::string&) {
      seed_set = true;
    });
    sub->add_option("--jobs", jobs, "worker threads, defaults to SEQDC_JOBS or 1");
    sub->add_option("--config", config_path, "JSON file with optimizer settings");
  }

  AdamConfig resolve(AdamConfig base) const {
    if (!config_path.empty()) apply_config_file(base, config_path);
    if (restarts >= 0) base.restarts = restarts;
    if (iters >= 0) base.max_iterations = iters;
    if (lr >= 0.0) base.learning_rate = lr;
    if (tol >= 0.0) base.convergence_tol = tol;
    if (seed_set) base.rng_seed = seed;
    if (jobs >= 0) base.jobs = jobs;
    return base;
  }
};

void add_format(CLI::App* sub, std::string& format,
                std::vector<std::string> allowed = {"json", "human"}) {
  sub->add_option("--format", format, "output format")
      ->check(CLI::IsMember(allowed))
      ->capture_default_str();
}

Json patterns_to_json(const std::vector<seqdc::Pattern>& pats) {
  Json arr = Json::array();
  for (const auto& p : pats) arr.push_back(Json::array({p.tail_len, p.cycle_len}));
  return arr;
}

Json dc_report(const std::string& s) {
  const BinarySequence seq = BinarySequence::from_string(s);
  const seqdc::DcResult res = seqdc::dc_and_patterns(seq);
  return Json{{"sequence", s},
              {"L", seq.length()},
              {"dc", res.dc},
              {"patterns", patterns_to_json(res.patterns)}};
}

Json candidate_to_json(const seqdc::GmcmCandidate& c) {
  return Json{{"block_sizes", c.block_sizes},
              {"start", c.start},
              {"cycle_probs", c.cycle_probs},
              {"probability", c.probability}};
}

Json outcome_summary(const seqdc::OptimizationOutcome& o) {
  return Json{{"converged", o.converged},
              {"restart_index", o.restart_index},
              {"iterations", o.iterations_used},
              {"total_iterations", o.total_iterations},
              {"failed_restarts", o.failed_restarts}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic complexity toolkit"};
  app.require_subcommand(1);

  // dc
  std::string dc_seq, dc_file, dc_format = "json";
  auto* dc = app.add_subcommand("dc", "deterministic complexity of a sequence");
  dc->add_option("seq", dc_seq, "binary sequence as a '0'/'1' string");
  dc->add_option("--file", dc_file, "newline-delimited file of sequences");
  add_format(dc, dc_format);
  dc->callback([&] {
    if (dc_seq.empty() == dc_file.empty())
      throw CLI::ValidationError("dc: provide a sequence or --file, not both");
    Json j;
    if (!dc_seq.empty()) {
      j = dc_report(dc_seq);
    } else {
      std::ifstream in(dc_file);
      if (!in) throw std::invalid_argument("cannot open " + dc_file);
      Json results = Json::array();
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) results.push_back(dc_report(line));
      j = Json{{"results", std::move(results)}};
    }
    emit(j, dc_format);
  });

  // patterns
  std::string pat_seq, pat_format = "json";
  auto* patterns = app.add_subcommand("patterns", "minimal tail/cycle splits of a sequence");
  patterns->add_option("seq", pat_seq, "binary sequence")->required();
  add_format(patterns, pat_format);
  patterns->callback([&] {
    const BinarySequence seq = BinarySequence::from_string(pat_seq);
    const seqdc::DcResult res = seqdc::dc_and_patterns(seq);
    Json arr = Json::array();
    for (const auto& p : res.patterns)
      arr.push_back(Json{{"tail_len", p.tail_len},
                         {"cycle_len", p.cycle_len},
                         {"rendering", seqdc::pattern_string(seq, p)}});
    emit(Json{{"sequence", pat_seq},
              {"dc", res.dc},
              {"patterns", std::move(arr)}},
         pat_format);
  });

  // count-patterns
  int cp_k = 2, cp_len = 0;
  bool cp_primitive = false;
  std::string cp_format = "json";
  auto* count = app.add_subcommand("count-patterns",
                                   "number of length-saturating sequences");
  count->add_option("--k", cp_k, "alphabet size")->capture_default_str();
  count->add_option("--len", cp_len, "sequence length")->required();
  count->add_flag("--primitive", cp_primitive, "count primitive cycles only");
  add_format(count, cp_format);
  count->callback([&] {
    const std::int64_t n = cp_primitive
                               ? seqdc::primitive_word_count(cp_k, cp_len)
                               : seqdc::minimal_pattern_count(cp_k, cp_len);
    emit(Json{{"k", cp_k},
              {"len", cp_len},
              {"primitive", cp_primitive},
              {"count", n}},
         cp_format);
  });

  // emcm
  int em_L = 0, em_d = 0;
  std::string em_format = "json";
  auto* emcm = app.add_subcommand("emcm", "best block-cycle automaton for the one-tick sequence");
  emcm->add_option("--L", em_L, "sequence length")->required();
  emcm->add_option("--d", em_d, "number of states")->required();
  add_format(emcm, em_format);
  emcm->callback([&] {
    const seqdc::EmcmOptimum best = seqdc::emcm_probability(em_L, em_d);
    emit(Json{{"L", em_L},
              {"d", em_d},
              {"probability", best.probability},
              {"params", seqdc::to_json(best.params)}},
         em_format);
  });

  // build-model
  std::string bm_model_path, bm_seq, bm_format = "json";
  std::vector<int> bm_blocks;
  std::vector<double> bm_qs;
  int bm_start = 0, bm_L = 0, bm_d = 0;
  auto* build = app.add_subcommand(
      "build-model", "construct or load a model and optionally score a sequence");
  build->add_option("--model", bm_model_path, "JSON model file to load");
  build->add_option("--blocks", bm_blocks, "cycle block sizes")->delimiter(',');
  build->add_option("--qs", bm_qs, "per-block loop probabilities")->delimiter(',');
  build->add_option("--start", bm_start, "start state inside the first block")
      ->capture_default_str();
  build->add_option("--L", bm_L, "one-tick sequence length");
  build->add_option("--d", bm_d, "number of states");
  build->add_option("--seq", bm_seq, "sequence to score with the model");
  add_format(build, bm_format);
  build->callback([&] {
    Json j;
    bool quantum = false;
    seqdc::ClassicalModel cm;
    seqdc::QuantumModel qm;
    if (!bm_model_path.empty()) {
      std::ifstream in(bm_model_path);
      if (!in) throw std::invalid_argument("cannot open " + bm_model_path);
      const Json file = Json::parse(in);
      quantum = file.contains("kraus");
      if (quantum) {
        qm = seqdc::quantum_from_json(file);
        j["model"] = seqdc::to_json(qm);
      } else {
        cm = seqdc::classical_from_json(file);
        j["model"] = seqdc::to_json(cm);
      }
    } else if (!bm_blocks.empty()) {
      cm = seqdc::build_gmcm({bm_blocks, bm_qs}, bm_start);
      j["model"] = seqdc::to_json(cm);
    } else if (bm_L > 0) {
      const seqdc::EmcmOptimum best = seqdc::emcm_probability(bm_L, bm_d);
      cm = seqdc::build_emcm(best.params);
      j["model"] = seqdc::to_json(cm);
      j["params"] = seqdc::to_json(best.params);
    } else {
      throw CLI::ValidationError(
          "build-model: need --model, --blocks/--qs, or --L/--d");
    }
    j["kind"] = quantum ? "quantum" : "classical";
    if (!bm_seq.empty()) {
      const BinarySequence seq = BinarySequence::from_string(bm_seq);
      j["sequence"] = bm_seq;
      j["probability"] = quantum ? seqdc::quantum_sequence_probability(qm, seq)
                                 : seqdc::sequence_probability(cm, seq);
    }
    emit(j, bm_format);
  });

  // optimize-classical
  std::string oc_seq, oc_out, oc_format = "json";
  int oc_d = 0;
  AdamFlags oc_flags;
  auto* optc = app.add_subcommand("optimize-classical",
                                  "fit a stochastic model to a sequence");
  optc->add_option("--seq", oc_seq, "target sequence")->required();
  optc->add_option("--d", oc_d, "number of states")->required();
  optc->add_option("--out", oc_out, "write the fitted model to this file");
  oc_flags.attach(optc);
  add_format(optc, oc_format);
  optc->callback([&] {
    const AdamConfig cfg = oc_flags.resolve(AdamConfig::classical_defaults());
    const BinarySequence seq = BinarySequence::from_string(oc_seq);
    const auto res = seqdc::optimize_classical(seq, oc_d, cfg);
    const int dc = seqdc::dc_and_patterns(seq).dc;
    Json j{{"sequence", oc_seq},
           {"L", seq.length()},
           {"d", oc_d},
           {"dc", dc},
           {"p_opt", res.probability},
           {"outcome", outcome_summary(res.outcome)},
           {"model", seqdc::to_json(res.model)},
           {"config", adam_to_json(cfg)}};
    if (oc_d < dc) j["bound_emcm"] = seqdc::conjectured_bound(seq, oc_d);
    if (!oc_out.empty()) write_file(oc_out, seqdc::to_json(res.model).dump(2) + "\n");
    emit(j, oc_format);
  });

  // optimize-quantum
  std::string oq_seq, oq_out, oq_format = "json";
  int oq_d = 0, oq_nk = 1;
  AdamFlags oq_flags;
  auto* optq = app.add_subcommand("optimize-quantum",
                                  "fit a Kraus-instrument model to a sequence");
  optq->add_option("--seq", oq_seq, "target sequence")->required();
  optq->add_option("--d", oq_d, "Hilbert space dimension")->required();
  optq->add_option("--nk", oq_nk, "Kraus operators per outcome")->capture_default_str();
  optq->add_option("--out", oq_out, "write the fitted model to this file");
  oq_flags.attach(optq);
  add_format(optq, oq_format);
  optq->callback([&] {
    const AdamConfig cfg = oq_flags.resolve(AdamConfig::quantum_defaults());
    const BinarySequence seq = BinarySequence::from_string(oq_seq);
    const auto res = seqdc::optimize_quantum(seq, oq_d, oq_nk, cfg);
    Json j{{"sequence", oq_seq},
           {"L", seq.length()},
           {"d", oq_d},
           {"n_kraus", oq_nk},
           {"dc", seqdc::dc_and_patterns(seq).dc},
           {"p_opt", res.probability},
           {"outcome", outcome_summary(res.outcome)},
           {"model", seqdc::to_json(res.model)},
           {"config", adam_to_json(cfg)}};
    if (!oq_out.empty()) write_file(oq_out, seqdc::to_json(res.model).dump(2) + "\n");
    emit(j, oq_format);
  });

  // gmcm-survey
  int gs_L = 0, gs_d = 0;
  double gs_tie_tol = 1e-6;
  bool gs_all = false;
  std::string gs_format = "json";
  AdamFlags gs_flags;
  auto* gsurv = app.add_subcommand(
      "gmcm-survey", "search block compositions for the one-tick sequence");
  gsurv->add_option("--L", gs_L, "sequence length")->required();
  gsurv->add_option("--d", gs_d, "number of states")->required();
  gsurv->add_option("--tie-tol", gs_tie_tol, "probability window counted as a tie")
      ->capture_default_str();
  gsurv->add_flag("--all", gs_all, "include every candidate in the output");
  gs_flags.attach(gsurv);
  add_format(gsurv, gs_format);
  gsurv->callback([&] {
    const AdamConfig cfg = gs_flags.resolve(seqdc::gmcm_default_config());
    const auto res = seqdc::gmcm_survey(gs_L, gs_d, cfg, gs_tie_tol);
    Json ties = Json::array();
    for (const auto& c : res.ties) ties.push_back(candidate_to_json(c));
    Json j{{"L", gs_L},
           {"d", gs_d},
           {"best", candidate_to_json(res.best)},
           {"ties", std::move(ties)},
           {"candidates", static_cast<int>(res.all.size())},
           {"tie_tol", gs_tie_tol},
           {"config", adam_to_json(cfg)}};
    if (gs_all) {
      Json all = Json::array();
      for (const auto& c : res.all) all.push_back(candidate_to_json(c));
      j["all"] = std::move(all);
    }
    emit(j, gs_format);
  });

  // survey
  std::string sv_kind = "classical", sv_store, sv_csv, sv_plot, sv_format = "json";
  int sv_Lmin = 2, sv_Lmax = 7;
  std::vector<int> sv_nk = {1};
  bool sv_no_models = false;
  AdamFlags sv_flags;
  auto* surv = app.add_subcommand("survey",
                                  "optimize every canonical sequence and state count");
  surv->add_option("--kind", sv_kind, "model family")
      ->check(CLI::IsMember({"classical", "quantum"}))
      ->capture_default_str();
  surv->add_option("--L-min", sv_Lmin, "shortest length")->capture_default_str();
  surv->add_option("--L-max", sv_Lmax, "longest length")->capture_default_str();
  surv->add_option("--nk-set", sv_nk, "Kraus counts to sweep (quantum)")
      ->delimiter(',');
  surv->add_option("--store", sv_store, "append-only JSONL store, enables resume");
  surv->add_option("--csv", sv_csv, "also write the store as CSV here");
  surv->add_option("--plot", sv_plot, "write ranked plot data here");
  surv->add_flag("--no-models", sv_no_models, "skip model JSON in records");
  sv_flags.attach(surv);
  add_format(surv, sv_format);
  surv->callback([&] {
    seqdc::SurveyOptions opt;
    opt.L_min = sv_Lmin;
    opt.L_max = sv_Lmax;
    const bool quantum = sv_kind == "quantum";
    opt.adam = sv_flags.resolve(quantum ? AdamConfig::quantum_defaults()
                                        : AdamConfig::classical_defaults());
    opt.jobs = opt.adam.jobs > 0 ? opt.adam.jobs : seqdc::default_jobs();
    opt.adam.jobs = 1;  // parallelism lives across cells, not restarts
    opt.n_kraus_set = sv_nk;
    opt.store_models = !sv_no_models;

    std::optional<seqdc::RecordStore> store;
    if (!sv_store.empty()) store.emplace(sv_store);
    const std::size_t before = store ? store->records().size() : 0;
    const auto records = quantum
                             ? seqdc::run_quantum_survey(opt, store ? &*store : nullptr)
                             : seqdc::run_classical_survey(opt, store ? &*store : nullptr);
    long long ok = 0, failed = 0;
    for (const auto& r : records) (r.p_opt ? ok : failed)++;
    Json j{{"kind", sv_kind},
           {"L_min", sv_Lmin},
           {"L_max", sv_Lmax},
           {"cells", records.size()},
           {"succeeded", ok},
           {"failed", failed},
           {"jobs", opt.jobs},
           {"config", adam_to_json(opt.adam)}};
    if (store) {
      j["store"] = sv_store;
      j["new_cells"] = store->records().size() - before;
      if (!sv_csv.empty()) {
        store->write_csv(sv_csv);
        j["csv"] = sv_csv;
      }
    }
    if (!sv_plot.empty()) {
      std::ofstream out(sv_plot);
      if (!out) throw std::invalid_argument("cannot open " + sv_plot);
      seqdc::write_plot_data(records, out);
      j["plot"] = sv_plot;
    }
    emit(j, sv_format);
  });

  // verify-conjecture
  std::string vc_store, vc_format = "json";
  double vc_tol_emcm = 1e-6, vc_tol_universal = 1e-9;
  auto* verify = app.add_subcommand("verify-conjecture",
                                    "check stored optima against the ceilings");
  verify->add_option("--store", vc_store, "JSONL store to audit")->required();
  verify->add_option("--tol-emcm", vc_tol_emcm, "slack over the per-cell ceiling")
      ->capture_default_str();
  verify->add_option("--tol-universal", vc_tol_universal, "slack over 1/e")
      ->capture_default_str();
  add_format(verify, vc_format);
  verify->callback([&] {
    const seqdc::RecordStore store(vc_store);
    const auto report =
        seqdc::verify_conjecture(store.records(), vc_tol_emcm, vc_tol_universal);
    Json viol_e = Json::array(), viol_u = Json::array();
    for (const auto& r : report.violations_emcm) viol_e.push_back(r.key());
    for (const auto& r : report.violations_universal) viol_u.push_back(r.key());
    emit(Json{{"store", vc_store},
              {"records", store.records().size()},
              {"checked", report.checked},
              {"skipped", report.skipped},
              {"holds", report.holds()},
              {"violations_emcm", std::move(viol_e)},
              {"violations_universal", std::move(viol_u)},
              {"max_excess_emcm", report.max_excess_emcm},
              {"max_excess_universal", report.max_excess_universal},
              {"tol_emcm", vc_tol_emcm},
              {"tol_universal", vc_tol_universal}},
         vc_format);
  });

  // quantum-ot-scan
  int qs_d = 0, qs_grid = 0;
  std::string qs_format = "json";
  auto* qscan = app.add_subcommand(
      "quantum-ot-scan", "sweep the rotation angle of the one-tick quantum model");
  qscan->add_option("--d", qs_d, "Hilbert space dimension")->required();
  qscan->add_option("--grid", qs_grid, "grid points, defaults to 40 * d");
  add_format(qscan, qs_format, {"json", "human", "csv"});
  qscan->callback([&] {
    const int grid = qs_grid > 0 ? qs_grid : 40 * qs_d;
    const seqdc::ThetaScanResult res = seqdc::theta_scan(qs_d, grid);
    if (qs_format == "csv") {
      std::cout << "theta,probability\n";
      char buf[64];
      for (const auto& [theta, p] : res.curve) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", theta, p);
        std::cout << buf;
      }
      return;
    }
    emit(Json{{"d", qs_d},
              {"q", res.q},
              {"grid", grid},
              {"theta_best", res.theta_best},
              {"theta_star", seqdc::theta_star(qs_d)},
              {"p_best", res.p_best}},
         qs_format);
  });

  // pc-q
  std::string pq_seq, pq_format = "json";
  double pq_q = 0.0;
  AdamFlags pq_flags;
  auto* pcq = app.add_subcommand(
      "pc-q", "fewest states reaching a target probability for a sequence");
  pcq->add_option("--seq", pq_seq, "target sequence")->required();
  pcq->add_option("--q", pq_q, "probability threshold in (0, 1]")->required();
  pq_flags.attach(pcq);
  add_format(pcq, pq_format);
  pcq->callback([&] {
    const AdamConfig cfg = pq_flags.resolve(AdamConfig::classical_defaults());
    const BinarySequence seq = BinarySequence::from_string(pq_seq);
    emit(Json{{"sequence", pq_seq},
              {"q", pq_q},
              {"states", seqdc::estimate_pc_q(seq, pq_q, cfg)},
              {"dc", seqdc::dc_and_patterns(seq).dc},
              {"config", adam_to_json(cfg)}},
         pq_format);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cout << Json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
