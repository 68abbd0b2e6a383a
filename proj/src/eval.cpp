#include "draftforge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "draftforge/error.hpp"
#include "draftforge/transcript.hpp"

namespace draftforge {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Lentz's continued fraction for I_x(a, b); valid for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string p_label(double p) {
  if (p < 0.001) return "(p<0.001)";
  char buf[32];
  std::snprintf(buf, sizeof buf, "(p=%.3f)", p);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string_view to_string(Arm arm) { return arm == Arm::Unassisted ? "unassisted" : "assisted"; }

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Overall: return "overall";
    case Category::Completeness: return "completeness";
    case Category::Neutrality: return "neutrality";
    case Category::Objectivity: return "objectivity";
    case Category::Terminology: return "terminology";
    case Category::Coherence: return "coherence";
  }
  return "overall";
}

std::optional<Arm> parse_arm(std::string_view text) {
  const auto t = to_lower_ascii(text);
  if (t == "unassisted") return Arm::Unassisted;
  if (t == "assisted") return Arm::Assisted;
  return std::nullopt;
}

std::optional<Category> parse_category(std::string_view text) {
  const auto t = to_lower_ascii(text);
  for (auto c : kCategoryOrder) {
    if (to_string(c) == t) return c;
  }
  return std::nullopt;
}

std::vector<RubricScore> parse_scores_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<RubricScore> out;
  std::set<std::tuple<std::string, Arm, std::string, Category>> keys;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (!header_seen) {
      if (f != std::vector<std::string>{"pair_id", "arm", "rater_id", "category", "score"})
        fail(ErrorKind::MalformedLine, "expected header pair_id,arm,rater_id,category,score", line_no);
      header_seen = true;
      continue;
    }
    if (f.size() != 5 || f[0].empty() || f[2].empty())
      fail(ErrorKind::MalformedLine, "expected 5 fields on line " + std::to_string(line_no), line_no);
    const auto arm = parse_arm(f[1]);
    const auto category = parse_category(f[3]);
    if (!arm || !category) fail(ErrorKind::MalformedLine, "unknown arm or category on line " + std::to_string(line_no), line_no);
    double score = 0.0;
    std::size_t used = 0;
    try {
      score = std::stod(f[4], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f[4].size())
      fail(ErrorKind::MalformedLine, "bad score on line " + std::to_string(line_no), line_no);
    if (!(score >= 1.0 && score <= 5.0))
      fail(ErrorKind::InvalidValue, "score outside [1, 5] on line " + std::to_string(line_no));
    if (!keys.insert({f[0], *arm, f[2], *category}).second)
      fail(ErrorKind::InvalidValue, "repeated score key on line " + std::to_string(line_no));
    out.push_back({f[0], *arm, f[2], *category, score});
  }
  if (!header_seen) fail(ErrorKind::MalformedLine, "missing header", 1);
  return out;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || x < 0.0 || x > 1.0) fail(ErrorKind::InvalidValue, "incomplete_beta domain error");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) fail(ErrorKind::InvalidValue, "degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t >= 0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(const std::vector<double>& differences) {
  const std::size_t n = differences.size();
  if (n < 2) fail(ErrorKind::TooFewPairs, "paired t-test needs at least two differences");
  TTestResult r;
  r.n = n;
  r.df = static_cast<double>(n - 1);
  r.mean_difference = mean_of(differences);
  double ss = 0.0;
  for (double d : differences) ss += (d - r.mean_difference) * (d - r.mean_difference);
  const double sd = std::sqrt(ss / r.df);
  // Constant differences up to rounding are treated as zero variance.
  const double scale = std::max(1.0, std::fabs(r.mean_difference));
  if (sd <= 1e-12 * scale) {
    r.degenerate = true;
    if (std::fabs(r.mean_difference) <= 1e-12) {
      r.t = 0.0;
      r.p_two_sided = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), r.mean_difference);
      r.p_two_sided = 0.0;
    }
    return r;
  }
  r.t = r.mean_difference / (sd / std::sqrt(static_cast<double>(n)));
  r.p_two_sided = std::clamp(incomplete_beta(r.df / 2.0, 0.5, r.df / (r.df + r.t * r.t)), 0.0, 1.0);
  return r;
}

void to_json(json& j, const PairedResult& r) {
  j = json{{"category", to_string(r.category)},
           {"mean_unassisted", r.mean_unassisted},
           {"mean_assisted", r.mean_assisted},
           {"t_statistic", finite_or_null(r.t_statistic)},
           {"degrees_of_freedom", r.degrees_of_freedom},
           {"p_value_two_sided", r.p_value_two_sided},
           {"n_pairs", r.n_pairs},
           {"degenerate", r.degenerate}};
}

std::vector<PairedResult> summarize(const std::vector<RubricScore>& scores) {
  // (category, pair) -> arm -> rater -> scores
  std::map<std::pair<Category, std::string>, std::map<Arm, std::map<std::string, std::vector<double>>>> cells;
  for (const auto& s : scores) cells[{s.category, s.report_pair_id}][s.arm][s.rater_id].push_back(s.score);

  std::map<Category, std::vector<std::pair<double, double>>> per_category;  // (unassisted, assisted) per pair
  for (const auto& [key, arms] : cells) {
    const auto& [category, pair] = key;
    if (arms.size() != 2)
      fail(ErrorKind::UnbalancedDesign, "pair " + pair + " lacks an arm for " + std::string(to_string(category)));
    const auto& u = arms.at(Arm::Unassisted);
    const auto& a = arms.at(Arm::Assisted);
    const bool common = std::any_of(u.begin(), u.end(), [&](const auto& kv) { return a.count(kv.first) > 0; });
    if (!common)
      fail(ErrorKind::UnbalancedDesign, "pair " + pair + " has no rater common to both arms");
    const auto arm_mean = [](const std::map<std::string, std::vector<double>>& raters) {
      std::vector<double> means;
      for (const auto& [rater, v] : raters) means.push_back(mean_of(v));
      return mean_of(means);
    };
    per_category[category].push_back({arm_mean(u), arm_mean(a)});
  }

  std::vector<PairedResult> out;
  for (auto category : kCategoryOrder) {
    const auto it = per_category.find(category);
    if (it == per_category.end()) continue;
    std::vector<double> un;
    std::vector<double> as;
    std::vector<double> diffs;
    for (const auto& [u, a] : it->second) {
      un.push_back(u);
      as.push_back(a);
      diffs.push_back(a - u);
    }
    PairedResult r;
    r.category = category;
    r.mean_unassisted = mean_of(un);
    r.mean_assisted = mean_of(as);
    r.n_pairs = diffs.size();
    if (diffs.size() < 2) {
      r.degenerate = true;
      r.p_value_two_sided = 1.0;
    } else {
      const auto t = paired_t_test(diffs);
      r.t_statistic = t.t;
      r.degrees_of_freedom = t.df;
      r.p_value_two_sided = t.p_two_sided;
      r.degenerate = t.degenerate;
    }
    out.push_back(r);
  }
  return out;
}

void to_json(json& j, const UsabilitySummary& u) {
  j = json{{"mean_rating", u.mean_rating},
           {"mean_minutes_saved", u.mean_minutes_saved},
           {"percent_of_baseline_time",
            u.percent_of_baseline_time ? json(*u.percent_of_baseline_time) : json(nullptr)}};
}

UsabilitySummary usability(const std::vector<double>& ratings, const std::vector<double>& minutes_saved,
                           std::optional<double> baseline_minutes) {
  if (ratings.empty() || minutes_saved.empty()) fail(ErrorKind::EmptyInput, "usability needs ratings and minutes saved");
  for (double r : ratings) {
    if (!(r >= 1.0 && r <= 5.0)) fail(ErrorKind::InvalidValue, "rating outside [1, 5]");
  }
  UsabilitySummary s;
  s.mean_rating = mean_of(ratings);
  s.mean_minutes_saved = mean_of(minutes_saved);
  if (baseline_minutes) {
    if (!(*baseline_minutes > 0.0)) fail(ErrorKind::InvalidValue, "baseline minutes must be positive");
    s.percent_of_baseline_time = s.mean_minutes_saved / *baseline_minutes * 100.0;
  }
  return s;
}

std::string render_table(const std::vector<PairedResult>& results) {
  std::vector<const PairedResult*> ordered;
  for (auto category : kCategoryOrder) {
    const auto it = std::find_if(results.begin(), results.end(),
                                 [&](const PairedResult& r) { return r.category == category; });
    if (it == results.end()) fail(ErrorKind::MissingCategory, "missing category " + std::string(to_string(category)));
    ordered.push_back(&*it);
  }

  std::vector<std::vector<std::string>> rows(3);
  rows[0].push_back("");
  rows[1].push_back(std::string(kUnassistedRowLabel));
  rows[2].push_back(std::string(kAssistedRowLabel));
  for (const auto* r : ordered) {
    auto name = std::string(to_string(r->category));
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    rows[0].push_back(name);
    rows[1].push_back(fixed2(r->mean_unassisted));
    auto assisted = fixed2(r->mean_assisted);
    if (r->p_value_two_sided < 0.05) assisted += " " + p_label(r->p_value_two_sided);
    rows[2].push_back(assisted);
  }
  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += row[c];
      if (c + 1 < row.size()) line.append(widths[c] - row[c].size(), ' ');
    }
    out += line + "\n";
  }
  out += "p-values: two-sided paired t-test on per-pair differences; no multiple-comparison correction applied.\n";
  return out;
}

}  // namespace draftforge
