#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "typostrike/experiment.hpp"

namespace typostrike {

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::volume: return "volume";
    case SweepAxis::position: return "position";
    case SweepAxis::repetition: return "repetition";
    case SweepAxis::voice: return "voice";
  }
  return "volume";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (auto a : {SweepAxis::volume, SweepAxis::position, SweepAxis::repetition, SweepAxis::voice}) {
    if (to_string(a) == name) return a;
  }
  throw DataError("unknown sweep axis '" + std::string(name) + "'");
}

SweepGrid SweepGrid::default_grid(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::volume: return {axis, {"0.5", "1", "2", "4", "8", "16"}};
    case SweepAxis::position: return {axis, {"0", "0.2", "0.4", "0.6", "0.8"}};
    case SweepAxis::repetition: return {axis, {"1", "2", "3", "4", "50"}};
    case SweepAxis::voice: return {axis, {"female", "male", "neutral"}};
  }
  return {};
}

namespace {

double parse_number(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DataError("sweep value '" + s + "' is not a number");
  }
  return v;
}

int parse_count(const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 1) {
    throw DataError("repetition value '" + s + "' must be a positive integer");
  }
  return v;
}

}  // namespace

void SweepGrid::validate() const {
  const std::string axis_name(to_string(axis));
  if (values.empty()) throw DataError(axis_name + " grid is empty");
  if (axis == SweepAxis::voice) {
    std::set<std::string> seen;
    for (const auto& v : values) {
      if (v.empty()) throw DataError("voice identifiers must be non-empty");
      if (!seen.insert(v).second) throw DataError("voice '" + v + "' listed twice");
    }
    return;
  }
  double prev = -1.0;
  for (const auto& v : values) {
    const double x = axis == SweepAxis::repetition ? parse_count(v) : parse_number(v);
    if (axis == SweepAxis::volume && x < 0.0) throw DataError("volume multipliers must be >= 0");
    if (axis == SweepAxis::position && !(x >= 0.0 && x < 1.0)) throw DataError("positions must lie in [0, 1)");
    if (x <= prev) throw DataError(axis_name + " grid must be strictly increasing");
    prev = x;
  }
}

Condition SweepGrid::apply(const Condition& base, std::size_t i) const {
  const std::string& v = values.at(i);
  Condition c = base;
  c.id = base.id + "@" + std::string(to_string(axis)) + "=" + v;
  switch (axis) {
    case SweepAxis::volume: c.injection.volume_multiplier = parse_number(v); break;
    case SweepAxis::position:
      if (std::holds_alternative<FillDuration>(base.injection.repetition)) {
        throw DataError("position sweep needs a fixed repetition count in the base condition");
      }
      c.injection.placement_fraction = parse_number(v);
      break;
    case SweepAxis::repetition: c.injection.repetition = FixedCount{parse_count(v)}; break;
    case SweepAxis::voice: c.injection.voice = v; break;
  }
  return c;
}

StealthMeans mean_stealth(const std::vector<ResultRow>& rows) {
  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
    void add(const std::optional<double>& v) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
    std::optional<double> mean() const {
      return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
    }
  };
  Acc rel, speech, entropy, flat, emb;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    rel.add(r.stealth.rel_rms);
    if (r.stealth.speech_recognition_shift) speech.add(static_cast<double>(*r.stealth.speech_recognition_shift));
    entropy.add(r.stealth.entropy_shift);
    flat.add(r.stealth.flatness_shift);
    emb.add(r.stealth.embedding_variance_shift);
  }
  return {rel.mean(), speech.mean(), entropy.mean(), flat.mean(), emb.mean()};
}

SweepResult run_sweep(const std::vector<DatasetItem>& items, const SweepGrid& grid, const Condition& base,
                      const ExperimentProviders& providers, const RunOptions& options,
                      const std::optional<std::filesystem::path>& results_dir) {
  grid.validate();
  SweepResult result{grid, {}};
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const Condition c = grid.apply(base, i);
    RunOutcome run;
    if (results_dir) {
      std::filesystem::create_directories(*results_dir);
      run = run_experiment(items, {c}, providers, options,
                           *results_dir / (std::string(to_string(grid.axis)) + "_" + std::to_string(i) + ".jsonl"));
    } else {
      run = run_experiment(items, {c}, providers, options);
    }
    SweepPoint p;
    p.value = grid.values[i];
    p.condition = c;
    p.overall = summarize(run.rows, c.id);
    for (auto m : {QuestionModality::audio, QuestionModality::visual, QuestionModality::audio_visual}) {
      const bool present = std::any_of(run.rows.begin(), run.rows.end(),
                                       [&](const ResultRow& r) { return r.ok && r.record.question_modality == m; });
      if (present) p.by_modality.emplace(m, summarize(run.rows, c.id, m));
    }
    p.stealth = mean_stealth(run.rows);
    result.points.push_back(std::move(p));
  }
  return result;
}

std::vector<FrontierPoint> tradeoff_frontier(const std::vector<SweepResult>& sweeps) {
  std::vector<FrontierPoint> out;
  for (const auto& sweep : sweeps) {
    for (const auto& p : sweep.points) {
      FrontierPoint f;
      f.family = std::string(to_string(sweep.grid.axis));
      f.value = p.value;
      const auto audio = p.by_modality.find(QuestionModality::audio);
      const auto visual = p.by_modality.find(QuestionModality::visual);
      const bool has_a = audio != p.by_modality.end(), has_v = visual != p.by_modality.end();
      if (has_a && has_v) {
        f.avg_task_accuracy =
            average_task_accuracy(audio->second.acc_attack().value(), visual->second.acc_attack().value());
      } else if (has_a) {
        f.avg_task_accuracy = audio->second.acc_attack().value();
      } else if (has_v) {
        f.avg_task_accuracy = visual->second.acc_attack().value();
      } else {
        f.avg_task_accuracy = p.overall.acc_attack().value();
      }
      f.stealth = p.stealth;
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::string_view to_string(StealthAxis a) {
  switch (a) {
    case StealthAxis::rel_rms: return "rel_rms";
    case StealthAxis::speech_recognition_rate: return "speech_recognition_rate";
    case StealthAxis::entropy_shift: return "entropy_shift";
    case StealthAxis::flatness_shift: return "flatness_shift";
    case StealthAxis::embedding_variance_shift: return "embedding_variance_shift";
  }
  return "rel_rms";
}

StealthAxis parse_stealth_axis(std::string_view name) {
  for (auto a : {StealthAxis::rel_rms, StealthAxis::speech_recognition_rate, StealthAxis::entropy_shift,
                 StealthAxis::flatness_shift, StealthAxis::embedding_variance_shift}) {
    if (to_string(a) == name) return a;
  }
  throw DataError("unknown stealth axis '" + std::string(name) + "'");
}

std::optional<double> stealth_value(const StealthMeans& m, StealthAxis axis) {
  switch (axis) {
    case StealthAxis::rel_rms: return m.rel_rms;
    case StealthAxis::speech_recognition_rate: return m.speech_recognition_rate;
    case StealthAxis::entropy_shift: return m.entropy_shift;
    case StealthAxis::flatness_shift: return m.flatness_shift;
    case StealthAxis::embedding_variance_shift: return m.embedding_variance_shift;
  }
  return std::nullopt;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = static_cast<double>(i + j + 2) / 2.0;  // 1-based mean of positions i..j
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DataError("rank correlation needs paired samples");
  if (x.size() < 3) throw DataError("rank correlation needs at least 3 points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError("rank correlation over non-finite values");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mean = static_cast<double>(x.size() + 1) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean, dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("rank correlation undefined for constant ranks");
  const double rho = sxx == syy ? sxy / sxx : sxy / std::sqrt(sxx * syy);
  return std::clamp(rho, -1.0, 1.0);
}

double rank_correlation(const std::vector<FrontierPoint>& points, StealthAxis axis) {
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (const auto v = stealth_value(p.stealth, axis)) {
      x.push_back(*v);
      y.push_back(p.avg_task_accuracy);
    }
  }
  return spearman(x, y);
}

}  // namespace typostrike
