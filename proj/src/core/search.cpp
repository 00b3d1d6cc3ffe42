#include "search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "csv.hpp"
#include "rng.hpp"

namespace execsim {

namespace {

bool csv_safe(const std::string& s) {
  for (char c : s) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') return false;
  }
  return !s.empty();
}

std::string sanitize_note(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

double apply_u(const UtilityFn* u, double v) { return u ? u->u(v) : v; }
double invert_u(const UtilityFn* u, double m) { return u ? u->u_inv(m) : m; }

}  // namespace

void ParamSpace::validate() const {
  if (dims.empty()) throw ConfigError("search.space must have dimensions");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const ParamDim& d = dims[i];
    if (!csv_safe(d.name)) {
      throw ConfigError("search.space dim " + std::to_string(i) +
                        " needs a csv-safe name");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (dims[j].name == d.name) {
        throw ConfigError("search.space duplicate dim name '" + d.name + "'");
      }
    }
    if (d.kind == ParamDim::Kind::Continuous) {
      if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !(d.lo < d.hi)) {
        throw ConfigError("search.space dim '" + d.name +
                          "' needs finite lo < hi");
      }
    } else {
      if (d.values.empty()) {
        throw ConfigError("search.space dim '" + d.name +
                          "' needs at least one value");
      }
      for (const std::string& v : d.values) {
        if (!csv_safe(v)) {
          throw ConfigError("search.space dim '" + d.name +
                            "' has a non-csv-safe value");
        }
      }
    }
  }
}

void HalvingConfig::validate() const {
  if (n_initial < 1) throw ConfigError("search.n_initial must be >= 1");
  if (eta < 2) throw ConfigError("search.eta must be >= 2");
  if (episodes_per_rung.empty()) {
    throw ConfigError("search.episodes_per_rung must be nonempty");
  }
  for (std::size_t r = 0; r < episodes_per_rung.size(); ++r) {
    if (episodes_per_rung[r] < 1) {
      throw ConfigError("search.episodes_per_rung entries must be >= 1");
    }
    if (r > 0 && episodes_per_rung[r] < episodes_per_rung[r - 1]) {
      throw ConfigError("search.episodes_per_rung must be non-decreasing");
    }
  }
  std::int64_t needed = 1;
  for (int r = 1; r < rungs(); ++r) {
    needed *= eta;
    if (needed > n_initial) {
      throw ConfigError(
          "search.n_initial must be >= eta^(rungs-1) so the last rung is "
          "nonempty");
    }
  }
}

std::vector<ParamPoint> sample_params(const ParamSpace& space, int n,
                                      std::uint64_t seed) {
  space.validate();
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  std::vector<ParamPoint> points;
  points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    CounterRng rng(derive_key(seed, 0x5A17u, static_cast<std::uint64_t>(i)));
    ParamPoint p;
    p.reserve(space.dims.size());
    for (const ParamDim& d : space.dims) {
      ParamValue v;
      if (d.kind == ParamDim::Kind::Continuous) {
        v.number = d.lo + (d.hi - d.lo) * rng.next_double();
      } else {
        const std::uint64_t idx = rng.uniform_below(d.values.size());
        v.number = static_cast<double>(idx);
        v.label = d.values[static_cast<std::size_t>(idx)];
      }
      p.push_back(std::move(v));
    }
    points.push_back(std::move(p));
  }
  return points;
}

double run_trial(const Objective& objective, const ParamPoint& params,
                 const std::vector<std::uint64_t>& seeds, int episodes,
                 const UtilityFn* u) {
  if (!objective) throw std::invalid_argument("objective must be callable");
  if (seeds.empty()) throw std::invalid_argument("seeds must be nonempty");
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  double sum_u = 0.0;
  std::int64_t count = 0;
  for (std::uint64_t s : seeds) {
    for (int k = 0; k < episodes; ++k) {
      sum_u += apply_u(
          u, objective(params, derive_key(s, static_cast<std::uint64_t>(k))));
      ++count;
    }
  }
  return invert_u(u, sum_u / static_cast<double>(count));
}

// ---- successive halving -------------------------------------------------------

namespace {

struct TrialState {
  ParamPoint params;
  double sum_u = 0.0;
  std::int64_t episodes = 0;
  bool alive = true;
  bool failed = false;
  std::string note;
};

double estimate_of(const TrialState& t, const UtilityFn* u) {
  if (t.episodes == 0) return std::numeric_limits<double>::quiet_NaN();
  return invert_u(u, t.sum_u / static_cast<double>(t.episodes));
}

// failed trials below everything, then higher estimate, then lower index
bool ranks_before(const TrialState& a, int ia, const TrialState& b, int ib,
                  const UtilityFn* u) {
  if (a.failed != b.failed) return !a.failed;
  if (!a.failed) {
    const double ea = estimate_of(a, u);
    const double eb = estimate_of(b, u);
    if (ea != eb) return ea > eb;
  }
  return ia < ib;
}

void write_checkpoint(const std::string& path, const ParamSpace& space,
                      const std::vector<TrialRecord>& ledger) {
  if (path.empty()) return;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot write " + tmp);
    save_ledger_csv(out, space, ledger);
    out.flush();
    if (!out) throw std::ios_base::failure("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

StudyResult successive_halving(const Objective& objective,
                               const ParamSpace& space,
                               const HalvingConfig& cfg, const UtilityFn* u,
                               std::uint64_t study_seed, int workers,
                               const std::string& checkpoint_path,
                               bool resume) {
  if (!objective) throw std::invalid_argument("objective must be callable");
  space.validate();
  cfg.validate();
  if (workers < 1) workers = 1;

  const std::vector<ParamPoint> samples =
      sample_params(space, cfg.n_initial, study_seed);
  std::vector<TrialState> states(samples.size());
  for (std::size_t t = 0; t < samples.size(); ++t) {
    states[t].params = samples[t];
  }

  StudyResult result;
  int start_rung = 0;

  if (resume && !checkpoint_path.empty() &&
      std::filesystem::exists(checkpoint_path)) {
    std::ifstream in(checkpoint_path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot read " + checkpoint_path);
    result.ledger = load_ledger_csv(in, space);

    int max_rung = -1;
    std::int64_t expected_cum = 0;
    int prev_rung = -1;
    for (const TrialRecord& rec : result.ledger) {
      if (rec.trial_index < 0 ||
          rec.trial_index >= static_cast<int>(samples.size()) ||
          rec.rung < 0 || rec.rung >= cfg.rungs() || rec.rung < prev_rung) {
        throw ConfigError("resume: checkpoint does not match the study");
      }
      if (rec.rung != prev_rung) {
        if (rec.rung != prev_rung + 1) {
          throw ConfigError("resume: checkpoint does not match the study");
        }
        prev_rung = rec.rung;
        expected_cum += cfg.episodes_per_rung[static_cast<std::size_t>(rec.rung)];
      }
      TrialState& st = states[static_cast<std::size_t>(rec.trial_index)];
      if (rec.params != st.params) {
        throw ConfigError("resume: checkpoint does not match the study");
      }
      const bool failed = !rec.note.empty();
      if (!failed && rec.episodes != expected_cum) {
        throw ConfigError("resume: checkpoint does not match the study");
      }
      st.episodes = rec.episodes;
      st.sum_u = rec.episodes > 0
                     ? apply_u(u, rec.utility) * static_cast<double>(rec.episodes)
                     : 0.0;
      st.failed = failed;
      st.note = rec.note;
      st.alive = rec.status == "running" || rec.status == "completed";
      max_rung = rec.rung;
    }
    start_rung = max_rung + 1;
  }

  for (int rung = start_rung; rung < cfg.rungs(); ++rung) {
    std::vector<int> tasks;
    for (std::size_t t = 0; t < states.size(); ++t) {
      if (states[t].alive) tasks.push_back(static_cast<int>(t));
    }
    if (tasks.empty()) throw std::runtime_error("halving: no live trials");

    const std::int64_t episodes_this =
        cfg.episodes_per_rung[static_cast<std::size_t>(rung)];

    struct Outcome {
      double sum_u = 0.0;
      std::int64_t done = 0;
      bool failed = false;
      std::string note;
    };
    std::vector<Outcome> outcomes(tasks.size());

    auto eval_task = [&](std::size_t slot) {
      const int t = tasks[slot];
      Outcome& o = outcomes[slot];
      for (std::int64_t k = 0; k < episodes_this; ++k) {
        const std::uint64_t seed =
            derive_key(study_seed, static_cast<std::uint64_t>(t),
                       static_cast<std::uint64_t>(rung),
                       static_cast<std::uint64_t>(k));
        try {
          o.sum_u += apply_u(
              u, objective(states[static_cast<std::size_t>(t)].params, seed));
          ++o.done;
        } catch (const std::exception& e) {
          o.failed = true;
          o.note = sanitize_note(e.what());
          break;
        }
      }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(workers), tasks.size());
    if (n_threads <= 1) {
      for (std::size_t slot = 0; slot < tasks.size(); ++slot) eval_task(slot);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      pool.reserve(n_threads);
      for (std::size_t w = 0; w < n_threads; ++w) {
        pool.emplace_back([&] {
          while (true) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= tasks.size()) break;
            eval_task(slot);
          }
        });
      }
      for (std::thread& th : pool) th.join();
    }

    for (std::size_t slot = 0; slot < tasks.size(); ++slot) {
      TrialState& st = states[static_cast<std::size_t>(tasks[slot])];
      st.sum_u += outcomes[slot].sum_u;
      st.episodes += outcomes[slot].done;
      if (outcomes[slot].failed) {
        st.failed = true;
        st.note = outcomes[slot].note;
        st.alive = false;
      }
    }

    // cut: keep the top ceil(n/eta) of this rung's trials (failed excluded)
    const bool last_rung = rung == cfg.rungs() - 1;
    std::vector<int> order = tasks;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return ranks_before(states[static_cast<std::size_t>(a)], a,
                          states[static_cast<std::size_t>(b)], b, u);
    });
    if (!last_rung) {
      const std::size_t keep =
          (tasks.size() + static_cast<std::size_t>(cfg.eta) - 1) /
          static_cast<std::size_t>(cfg.eta);
      for (std::size_t i = 0; i < order.size(); ++i) {
        TrialState& st = states[static_cast<std::size_t>(order[i])];
        if (i >= keep || st.failed) st.alive = false;
      }
    }

    for (int t : tasks) {
      const TrialState& st = states[static_cast<std::size_t>(t)];
      TrialRecord rec;
      rec.trial_index = t;
      rec.rung = rung;
      rec.params = st.params;
      rec.episodes = st.episodes;
      rec.utility = estimate_of(st, u);
      rec.status = st.failed          ? "stopped"
                   : last_rung        ? "completed"
                   : st.alive         ? "running"
                                      : "stopped";
      rec.note = st.note;
      result.ledger.push_back(std::move(rec));
    }

    write_checkpoint(checkpoint_path, space, result.ledger);

    bool any_alive = false;
    for (const TrialState& st : states) any_alive |= st.alive;
    if (!any_alive) throw std::runtime_error("halving: every trial failed");
  }

  // winner: best completed trial of the final rung (ties -> lower index)
  for (const TrialRecord& rec : result.ledger) {
    if (rec.rung != cfg.rungs() - 1 || rec.status != "completed") continue;
    if (result.best_trial < 0 ||
        ranks_before(states[static_cast<std::size_t>(rec.trial_index)],
                     rec.trial_index,
                     states[static_cast<std::size_t>(result.best_trial)],
                     result.best_trial, u)) {
      result.best_trial = rec.trial_index;
    }
  }
  if (result.best_trial < 0) {
    throw std::runtime_error("halving: no trial completed the final rung");
  }
  result.best_params = states[static_cast<std::size_t>(result.best_trial)].params;
  result.best_utility =
      estimate_of(states[static_cast<std::size_t>(result.best_trial)], u);
  return result;
}

// ---- ledger CSV ----------------------------------------------------------------

void save_ledger_csv(std::ostream& out, const ParamSpace& space,
                     const std::vector<TrialRecord>& ledger) {
  out << "trial_index,rung";
  for (const ParamDim& d : space.dims) out << ',' << d.name;
  out << ",episodes,utility,status,note\n";
  for (const TrialRecord& rec : ledger) {
    if (rec.params.size() != space.dims.size()) {
      throw std::invalid_argument("ledger record does not match the space");
    }
    out << fmt(static_cast<std::int64_t>(rec.trial_index)) << ','
        << fmt(static_cast<std::int64_t>(rec.rung));
    for (std::size_t d = 0; d < space.dims.size(); ++d) {
      out << ',';
      if (space.dims[d].kind == ParamDim::Kind::Continuous) {
        out << fmt(rec.params[d].number);
      } else {
        out << rec.params[d].label;
      }
    }
    out << ',' << fmt(rec.episodes) << ',' << fmt(rec.utility) << ','
        << rec.status << ',' << sanitize_note(rec.note) << '\n';
  }
}

std::vector<TrialRecord> load_ledger_csv(std::istream& in,
                                         const ParamSpace& space) {
  const auto rows = read_csv(in);
  std::vector<std::string> header = {"trial_index", "rung"};
  for (const ParamDim& d : space.dims) header.push_back(d.name);
  header.insert(header.end(), {"episodes", "utility", "status", "note"});
  if (rows.empty() || rows[0] != header) {
    throw ConfigError("ledger csv: header does not match the study space");
  }
  std::vector<TrialRecord> ledger;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    // a trailing empty note is dropped by the line splitter; tolerate both
    if (row.size() != header.size() && row.size() != header.size() - 1) {
      throw ConfigError("ledger csv: bad row " + std::to_string(r));
    }
    TrialRecord rec;
    rec.trial_index = static_cast<int>(parse_i64(row[0]));
    rec.rung = static_cast<int>(parse_i64(row[1]));
    rec.params.resize(space.dims.size());
    for (std::size_t d = 0; d < space.dims.size(); ++d) {
      const std::string& cell = row[2 + d];
      if (space.dims[d].kind == ParamDim::Kind::Continuous) {
        rec.params[d].number = parse_double(cell);
      } else {
        const auto& vals = space.dims[d].values;
        auto it = std::find(vals.begin(), vals.end(), cell);
        if (it == vals.end()) {
          throw ConfigError("ledger csv: unknown value '" + cell +
                            "' for dim '" + space.dims[d].name + "'");
        }
        rec.params[d].label = cell;
        rec.params[d].number = static_cast<double>(it - vals.begin());
      }
    }
    const std::size_t base = 2 + space.dims.size();
    rec.episodes = parse_i64(row[base]);
    rec.utility = parse_double(row[base + 1]);
    rec.status = row[base + 2];
    if (rec.status != "running" && rec.status != "stopped" &&
        rec.status != "completed") {
      throw ConfigError("ledger csv: bad status '" + rec.status + "'");
    }
    rec.note = row.size() == header.size() ? row[base + 3] : "";
    ledger.push_back(std::move(rec));
  }
  return ledger;
}

}  // namespace execsim
