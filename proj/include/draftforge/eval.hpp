#pragma once

// draftforge/eval.hpp — Paired rubric-score statistics and usability arithmetic.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace draftforge {

enum class Arm { Unassisted, Assisted };
enum class Category { Overall, Completeness, Neutrality, Objectivity, Terminology, Coherence };

inline constexpr std::array<Category, 6> kCategoryOrder = {Category::Overall,     Category::Completeness,
                                                            Category::Neutrality,  Category::Objectivity,
                                                            Category::Terminology, Category::Coherence};

std::string_view to_string(Arm arm);
std::string_view to_string(Category category);
std::optional<Arm> parse_arm(std::string_view text);
std::optional<Category> parse_category(std::string_view text);

struct RubricScore {
  std::string report_pair_id;
  Arm arm = Arm::Unassisted;
  std::string rater_id;
  Category category = Category::Overall;
  double score = 0.0;  // [1, 5]
};

// CSV with header pair_id,arm,rater_id,category,score. Throws MalformedLine
// (count = 1-based line), InvalidValue for out-of-scale scores or a repeated
// (pair, arm, rater, category) key.
std::vector<RubricScore> parse_scores_csv(std::string_view text);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);
// P(T <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
  double t = 0.0;   // +-inf when the differences are constant and non-zero
  double df = 0.0;
  double p_two_sided = 1.0;
  bool degenerate = false;  // zero variance: p is 1 if the mean is 0, else 0
  double mean_difference = 0.0;
  std::size_t n = 0;
};

// Throws TooFewPairs for fewer than two differences.
TTestResult paired_t_test(const std::vector<double>& differences);

struct PairedResult {
  Category category = Category::Overall;
  double mean_unassisted = 0.0;
  double mean_assisted = 0.0;
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value_two_sided = 1.0;
  std::size_t n_pairs = 0;
  bool degenerate = false;  // zero-variance differences, or a single pair (p = 1)
};

void to_json(nlohmann::json& j, const PairedResult& r);

// Per category present in the scores, in kCategoryOrder: rater scores per
// (pair, arm) averaged first, then arm means over pairs and a paired t-test
// on assisted - unassisted. Throws UnbalancedDesign when a (pair, category)
// lacks an arm or shares no rater across arms.
std::vector<PairedResult> summarize(const std::vector<RubricScore>& scores);

struct UsabilitySummary {
  double mean_rating = 0.0;
  double mean_minutes_saved = 0.0;
  std::optional<double> percent_of_baseline_time;  // mean saved / baseline * 100
};

void to_json(nlohmann::json& j, const UsabilitySummary& u);

// Throws EmptyInput for an empty list, InvalidValue for a rating outside
// [1, 5] or a non-positive baseline.
UsabilitySummary usability(const std::vector<double>& ratings, const std::vector<double>& minutes_saved,
                           std::optional<double> baseline_minutes);

inline constexpr std::string_view kUnassistedRowLabel = "Reports written with no system use";
inline constexpr std::string_view kAssistedRowLabel = "Reports written with system assistance";

// Fixed column order, two-decimal means, "(p=0.033)" after an assisted mean
// when p < 0.05. Throws MissingCategory unless all six categories are present.
std::string render_table(const std::vector<PairedResult>& results);

}  // namespace draftforge
