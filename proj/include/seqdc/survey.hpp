#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "seqdc/classical_opt.hpp"
#include "seqdc/emcm.hpp"
#include "seqdc/quantum_opt.hpp"
#include "seqdc/serialize.hpp"
#include "seqdc/util.hpp"

namespace seqdc {

inline constexpr double kUniversalBound = 0.36787944117144233;  // 1/e

enum class ModelKind { classical, quantum };

inline std::string to_string(ModelKind k) {
  return k == ModelKind::classical ? "classical" : "quantum";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "classical") return ModelKind::classical;
  if (s == "quantum") return ModelKind::quantum;
  throw std::invalid_argument("unknown model kind: " + s);
}

// One optimisation cell of a survey.  p_opt is absent when every restart of
// the cell failed; such cells are kept so reruns do not retry them silently.
struct SurveyRecord {
  std::string sequence;
  int L = 0;
  int d = 0;
  int dc = 0;
  ModelKind model_kind = ModelKind::classical;
  std::optional<int> n_kraus;
  std::optional<double> p_opt;
  double bound_emcm = 0.0;
  std::uint64_t seed = 0;
  int restarts_used = 0;
  long long iterations = 0;
  double wall_time = 0.0;
  Json model;  // null when not stored

  std::string key() const {
    return sequence + "|" + std::to_string(d) + "|" + to_string(model_kind) +
           "|" + (n_kraus ? std::to_string(*n_kraus) : "-");
  }
};

inline Json record_to_json(const SurveyRecord& r) {
  Json j{{"sequence", r.sequence},
         {"L", r.L},
         {"d", r.d},
         {"dc", r.dc},
         {"model_kind", to_string(r.model_kind)},
         {"n_kraus", r.n_kraus ? Json(*r.n_kraus) : Json(nullptr)},
         {"p_opt", r.p_opt ? Json(*r.p_opt) : Json(nullptr)},
         {"bound_emcm", r.bound_emcm},
         {"seed", r.seed},
         {"restarts_used", r.restarts_used},
         {"iterations", r.iterations},
         {"wall_time", r.wall_time},
         {"model", r.model}};
  return j;
}

inline SurveyRecord record_from_json(const Json& j) {
  SurveyRecord r;
  r.sequence = j.at("sequence").get<std::string>();
  r.L = j.at("L").get<int>();
  r.d = j.at("d").get<int>();
  r.dc = j.at("dc").get<int>();
  r.model_kind = model_kind_from_string(j.at("model_kind").get<std::string>());
  if (!j.at("n_kraus").is_null()) r.n_kraus = j.at("n_kraus").get<int>();
  if (!j.at("p_opt").is_null()) r.p_opt = j.at("p_opt").get<double>();
  r.bound_emcm = j.at("bound_emcm").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.restarts_used = j.at("restarts_used").get<int>();
  r.iterations = j.at("iterations").get<long long>();
  r.wall_time = j.at("wall_time").get<double>();
  r.model = j.value("model", Json(nullptr));
  return r;
}

// Append-only JSONL store.  A truncated final line (torn write from a killed
// run) is dropped on load; garbage anywhere else is an error.
class RecordStore {
 public:
  explicit RecordStore(std::string path) : path_(std::move(path)) { load(); }

  bool contains(const std::string& key) const { return index_.count(key) > 0; }

  const std::vector<SurveyRecord>& records() const { return records_; }

  const SurveyRecord* find(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  void append(const SurveyRecord& r) {
    std::ofstream out(path_, std::ios::app);
    if (!out) throw std::runtime_error("RecordStore: cannot open " + path_);
    out << record_to_json(r).dump() << "\n";
    out.flush();
    if (!out) throw std::runtime_error("RecordStore: write failed on " + path_);
    index_[r.key()] = records_.size();
    records_.push_back(r);
  }

  static void write_csv_header(std::ostream& out) {
    out << "sequence,L,d,dc,model_kind,n_kraus,p_opt,bound_emcm,seed,"
           "restarts_used,iterations,wall_time\n";
  }

  static void write_csv_row(std::ostream& out, const SurveyRecord& r) {
    out << r.sequence << ',' << r.L << ',' << r.d << ',' << r.dc << ','
        << to_string(r.model_kind) << ',';
    if (r.n_kraus) out << *r.n_kraus;
    out << ',';
    if (r.p_opt) out << format_double(*r.p_opt);
    out << ',' << format_double(r.bound_emcm) << ',' << r.seed << ','
        << r.restarts_used << ',' << r.iterations << ','
        << format_double(r.wall_time) << "\n";
  }

  void write_csv(const std::string& csv_path) const {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("RecordStore: cannot open " + csv_path);
    write_csv_header(out);
    for (const auto& r : records_) write_csv_row(out, r);
  }

  static std::string format_double(double x) {
    std::ostringstream ss;
    ss.precision(17);
    ss << x;
    return ss.str();
  }

 private:
  void load() {
    std::ifstream in(path_);
    if (!in) return;  // fresh store
    std::string line, pending_error;
    bool pending = false;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (pending)
        throw std::runtime_error("RecordStore: corrupt line in " + path_ + ": " +
                                 pending_error);
      try {
        SurveyRecord r = record_from_json(Json::parse(line));
        index_[r.key()] = records_.size();
        records_.push_back(std::move(r));
      } catch (const std::exception& e) {
        pending = true;  // only fatal if another line follows
        pending_error = e.what();
      }
    }
  }

  std::string path_;
  std::vector<SurveyRecord> records_;
  std::map<std::string, std::size_t> index_;
};

using DRule = std::function<std::vector<int>(const BinarySequence&, int dc)>;

inline std::vector<int> all_d_below_dc(const BinarySequence&, int dc) {
  std::vector<int> ds;
  for (int d = 1; d < dc; ++d) ds.push_back(d);
  return ds;
}

struct SurveyOptions {
  int L_min = 2;
  int L_max = 7;
  AdamConfig adam;  // per-cell budget; the cell seed overrides rng_seed
  std::vector<int> n_kraus_set = {1};  // quantum surveys only
  int jobs = 1;
  bool store_models = true;
  DRule d_rule;  // defaults to every d in 1..dc-1
};

namespace detail {

struct SurveyCell {
  BinarySequence seq;
  int dc;
  int d;
  std::optional<int> n_kraus;
};

inline std::vector<SurveyCell> survey_cells(const SurveyOptions& opt,
                                            ModelKind kind) {
  if (opt.L_min < 2 || opt.L_max < opt.L_min)
    throw std::invalid_argument("survey: need 2 <= L_min <= L_max");
  const DRule rule = opt.d_rule ? opt.d_rule : all_d_below_dc;
  std::vector<SurveyCell> cells;
  for (int L = opt.L_min; L <= opt.L_max; ++L) {
    for_each_canonical_sequence(L, [&](const BinarySequence& seq) {
      const int dc = dc_and_patterns(seq).dc;
      for (int d : rule(seq, dc)) {
        if (d < 1 || d >= dc)
          throw std::invalid_argument("survey: d rule produced d outside 1..dc-1");
        if (kind == ModelKind::classical) {
          cells.push_back({seq, dc, d, std::nullopt});
        } else {
          for (int nk : opt.n_kraus_set) {
            if (nk < 1)
              throw std::invalid_argument("survey: n_kraus must be >= 1");
            cells.push_back({seq, dc, d, nk});
          }
        }
      }
    });
  }
  return cells;
}

inline SurveyRecord run_cell(const SurveyCell& cell, ModelKind kind,
                             const SurveyOptions& opt, std::uint64_t base_seed) {
  SurveyRecord r;
  r.sequence = cell.seq.str();
  r.L = cell.seq.length();
  r.d = cell.d;
  r.dc = cell.dc;
  r.model_kind = kind;
  r.n_kraus = cell.n_kraus;
  r.bound_emcm = conjectured_bound_for_dc(cell.dc, cell.d);
  r.seed = hash_seed(base_seed, r.key());
  AdamConfig cfg = opt.adam;
  cfg.rng_seed = r.seed;
  cfg.jobs = 1;  // survey-level parallelism only
  const auto start = std::chrono::steady_clock::now();
  try {
    if (kind == ModelKind::classical) {
      ClassicalOptResult res = optimize_classical(cell.seq, cell.d, cfg);
      r.p_opt = res.probability;
      r.restarts_used = cfg.restarts - res.outcome.failed_restarts;
      r.iterations = res.outcome.total_iterations;
      if (opt.store_models) r.model = to_json(res.model);
    } else {
      QuantumOptResult res = optimize_quantum(cell.seq, cell.d, *cell.n_kraus, cfg);
      r.p_opt = res.probability;
      r.restarts_used = cfg.restarts - res.outcome.failed_restarts;
      r.iterations = res.outcome.total_iterations;
      if (opt.store_models) r.model = to_json(res.model);
    }
  } catch (const std::exception&) {
    r.p_opt = std::nullopt;  // keep the cell, do not abort the survey
    r.restarts_used = 0;
  }
  const auto stop = std::chrono::steady_clock::now();
  r.wall_time = std::chrono::duration<double>(stop - start).count();
  return r;
}

inline std::vector<SurveyRecord> run_survey(ModelKind kind,
                                            const SurveyOptions& opt,
                                            RecordStore* store) {
  const std::vector<SurveyCell> cells = survey_cells(opt, kind);
  const std::uint64_t base_seed = opt.adam.rng_seed;

  // Resume: cells already present in the store keep their stored record.
  std::vector<std::optional<SurveyRecord>> results(cells.size());
  std::vector<bool> fresh(cells.size(), false);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    SurveyRecord probe;
    probe.sequence = cells[i].seq.str();
    probe.d = cells[i].d;
    probe.model_kind = kind;
    probe.n_kraus = cells[i].n_kraus;
    const SurveyRecord* existing = store ? store->find(probe.key()) : nullptr;
    if (existing) {
      results[i] = *existing;
    } else {
      fresh[i] = true;
      todo.push_back(i);
    }
  }

  parallel_for(todo.size(), opt.jobs, [&](std::size_t t) {
    const std::size_t i = todo[t];
    results[i] = run_cell(cells[i], kind, opt, base_seed);
  });

  // Single writer, canonical cell order regardless of completion order.
  std::vector<SurveyRecord> out;
  out.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (store && fresh[i]) store->append(*results[i]);
    out.push_back(std::move(*results[i]));
  }
  return out;
}

}  // namespace detail

inline std::vector<SurveyRecord> run_classical_survey(const SurveyOptions& opt,
                                                      RecordStore* store = nullptr) {
  return detail::run_survey(ModelKind::classical, opt, store);
}

inline std::vector<SurveyRecord> run_quantum_survey(const SurveyOptions& opt,
                                                    RecordStore* store = nullptr) {
  return detail::run_survey(ModelKind::quantum, opt, store);
}

struct ConjectureReport {
  long long checked = 0;  // classical records carrying a p_opt
  long long skipped = 0;  // failed cells and quantum records
  std::vector<SurveyRecord> violations_emcm;
  std::vector<SurveyRecord> violations_universal;
  double max_excess_emcm = -1.0;       // max p_opt - bound_emcm
  double max_excess_universal = -1.0;  // max p_opt - 1/e
  bool holds() const {
    return violations_emcm.empty() && violations_universal.empty();
  }
};

// Checks every classical record against its one-tick ceiling and the 1/e
// ceiling.  Tolerances absorb optimiser noise; excesses are reported so a
// near miss is visible even when no record crosses the line.
inline ConjectureReport verify_conjecture(const std::vector<SurveyRecord>& records,
                                          double tol_emcm = 1e-6,
                                          double tol_universal = 1e-6) {
  ConjectureReport rep;
  for (const auto& r : records) {
    if (r.model_kind != ModelKind::classical || !r.p_opt) {
      ++rep.skipped;
      continue;
    }
    ++rep.checked;
    const double excess_emcm = *r.p_opt - r.bound_emcm;
    const double excess_universal = *r.p_opt - kUniversalBound;
    rep.max_excess_emcm = std::max(rep.max_excess_emcm, excess_emcm);
    rep.max_excess_universal = std::max(rep.max_excess_universal, excess_universal);
    if (excess_emcm > tol_emcm) rep.violations_emcm.push_back(r);
    if (excess_universal > tol_universal) rep.violations_universal.push_back(r);
  }
  return rep;
}

// rank,p_opt,bound_emcm,one_over_e rows sorted by p_opt descending, for
// plotting the survey against both ceilings.
inline void write_plot_data(const std::vector<SurveyRecord>& records,
                            std::ostream& out) {
  std::vector<const SurveyRecord*> rows;
  for (const auto& r : records)
    if (r.model_kind == ModelKind::classical && r.p_opt)
      rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SurveyRecord* a, const SurveyRecord* b) {
                     if (*a->p_opt != *b->p_opt) return *a->p_opt > *b->p_opt;
                     return a->key() < b->key();
                   });
  out << "rank,p_opt,bound_emcm,one_over_e\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << (i + 1) << ',' << RecordStore::format_double(*rows[i]->p_opt) << ','
        << RecordStore::format_double(rows[i]->bound_emcm) << ','
        << RecordStore::format_double(kUniversalBound) << "\n";
}

// All ordered ways to write d as a sum of positive parts, lexicographic by
// parts.
inline std::vector<std::vector<int>> integer_compositions(int d) {
  if (d < 1) throw std::invalid_argument("integer_compositions: d must be >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int rest) -> void {
    if (rest == 0) {
      out.push_back(cur);
      return;
    }
    for (int part = 1; part <= rest; ++part) {
      cur.push_back(part);
      self(self, rest - part);
      cur.pop_back();
    }
  };
  rec(rec, d);
  return out;
}

struct GmcmCandidate {
  std::vector<int> block_sizes;
  int start = 0;
  std::vector<double> cycle_probs;
  double probability = 0.0;
};

struct GmcmSurveyResult {
  int L = 0;
  int d = 0;
  GmcmCandidate best;
  std::vector<GmcmCandidate> ties;  // within tie_tol of best, search order
  std::vector<GmcmCandidate> all;
  double tie_tol = 0.0;
};

inline AdamConfig gmcm_default_config() {
  AdamConfig c;
  c.learning_rate = 0.02;
  c.max_iterations = 5000;
  c.restarts = 4;
  c.convergence_tol = 1e-10;
  return c;
}

// Optimises the one-tick probability over every block composition of d and
// every admissible start state, with the per-block loop probabilities as the
// free parameters (logistic-reparameterised so the ascent is unconstrained).
inline GmcmSurveyResult gmcm_survey(int L, int d,
                                    const AdamConfig& config = gmcm_default_config(),
                                    double tie_tol = 1e-6) {
  if (d < 1 || d >= L)
    throw std::invalid_argument("gmcm_survey: need 1 <= d < L");
  config.validate();
  const BinarySequence target = BinarySequence::one_tick(L);

  GmcmSurveyResult out;
  out.L = L;
  out.d = d;
  out.tie_tol = tie_tol;
  std::uint64_t candidate_index = 0;
  for (const auto& comp : integer_compositions(d)) {
    for (int start = 0; start < comp.front(); ++start) {
      const std::size_t n = comp.size();
      Objective objective = [&](const std::vector<double>& x) -> double {
        GmcmSignature sig{comp, {}};
        sig.cycle_probs.reserve(n);
        for (double v : x) sig.cycle_probs.push_back(1.0 / (1.0 + std::exp(-v)));
        return sequence_probability(build_gmcm(sig, start), target);
      };
      AdamConfig cfg = config;
      cfg.rng_seed = derive_seed(config.rng_seed, candidate_index++);
      std::mt19937_64 rng(derive_seed(cfg.rng_seed, 0));
      OptimizationOutcome res =
          adam_maximize(objective, nullptr, uniform_symmetric(n, rng), cfg);
      GmcmCandidate cand{comp, start, {}, res.best_value};
      cand.cycle_probs.reserve(n);
      for (double v : res.best_params)
        cand.cycle_probs.push_back(1.0 / (1.0 + std::exp(-v)));
      out.all.push_back(std::move(cand));
    }
  }
  const auto best_it = std::max_element(
      out.all.begin(), out.all.end(),
      [](const GmcmCandidate& a, const GmcmCandidate& b) {
        return a.probability < b.probability;  // first max wins ties
      });
  out.best = *best_it;
  for (const auto& c : out.all)
    if (c.probability >= out.best.probability - tie_tol) out.ties.push_back(c);
  return out;
}

// Smallest number of states that reaches probability q on seq; the minimal
// deterministic count is returned when no smaller model gets there.
inline int estimate_pc_q(const BinarySequence& seq, double q,
                         const AdamConfig& config = AdamConfig::classical_defaults()) {
  if (!(q > 0.0 && q <= 1.0))
    throw std::invalid_argument("estimate_pc_q: need 0 < q <= 1");
  const int dc = dc_and_patterns(seq).dc;
  for (int d = 1; d < dc; ++d) {
    AdamConfig cfg = config;
    cfg.rng_seed = derive_seed(config.rng_seed, static_cast<std::uint64_t>(d));
    if (optimize_classical(seq, d, cfg).probability >= q - 1e-6) return d;
  }
  return dc;
}

}  // namespace seqdc
