#pragma once

#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "core/error.hpp"

namespace rdl::scoring {

// Calendar date in the proleptic Gregorian calendar. Ordering is
// field-lexicographic, which coincides with chronological order for
// valid dates.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  // Accepts exactly "YYYY-MM-DD"; the date must exist on the calendar.
  static Date parse(std::string_view text);
  [[nodiscard]] bool valid() const;
  [[nodiscard]] std::string to_string() const;

  auto operator<=>(const Date&) const = default;
};

enum class EventKind : std::uint8_t {
  kArrest,
  kMisdemeanorConviction,
  kFelonyConviction,
  kViolentConviction,
  kFta,
  kIncarcerationSentence,
};

// Class of a violent conviction when the docket distinguishes; violent
// convictions with no explicit severity count against prior_felony.
enum class Severity : std::uint8_t { kFelony, kMisdemeanor };

struct HistoryEvent {
  EventKind kind = EventKind::kArrest;
  Date date;
  Severity severity = Severity::kFelony;
};

EventKind event_kind_from_string(std::string_view name);
std::string_view event_kind_to_string(EventKind kind);

// The nine scorer inputs. Bool fields contribute their point value when
// set; count fields index a step table; age indexes a band table.
struct DefendantRecord {
  int age_at_arrest = 0;
  bool current_violent_offense = false;
  bool pending_charge_at_offense = false;
  bool prior_misdemeanor = false;
  bool prior_felony = false;
  int prior_violent_conviction_count = 0;
  int fta_within_2yr_count = 0;
  int fta_older_2yr_count = 0;
  bool prior_incarceration = false;

  void validate() const;  // throws ValidationError
};

struct CurrentCharge {
  int age = 0;
  bool violent_offense = false;
  bool pending_charge = false;
};

// Tallies prior-history factors from events dated strictly before as_of
// and merges them with the current-charge inputs. An FTA dated exactly
// two calendar years before as_of counts as within two years.
DefendantRecord derive_factors(std::span<const HistoryEvent> events,
                               const CurrentCharge& current, const Date& as_of);

enum class FactorKind : std::uint8_t { kBool, kCount, kAge };

// Field schema of DefendantRecord, keyed by field name. Throws
// ValidationError for names outside the nine factors.
FactorKind factor_kind(std::string_view field);
int factor_value(const DefendantRecord& record, std::string_view field);
std::span<const std::string_view> factor_names();

struct PointSpec {
  FactorKind kind = FactorKind::kBool;
  int bool_points = 0;          // kBool: awarded when the flag is set
  std::vector<int> steps;       // kCount: points = steps[min(count, last)]
  struct AgeBand {
    int max = 0;                // inclusive upper age; ignored when open
    int points = 0;
    bool open = false;          // final catch-all band
  };
  std::vector<AgeBand> bands;   // kAge: first band with age <= max wins

  [[nodiscard]] int evaluate(int value) const;
};

struct OutputSpec {
  int range_min = 0;
  int range_max = 0;
  std::map<std::string, PointSpec> points;  // factor name -> spec
  std::vector<int> cutpoints;               // strictly increasing, size = span

  [[nodiscard]] int raw_score(const DefendantRecord& record) const;
  [[nodiscard]] int final_score(int raw) const;
};

struct RiskScores {
  int fta = 0;
  int nca = 0;
  int nvca = 0;

  bool operator==(const RiskScores&) const = default;
};

// The scorer is entirely table-driven; no factor weights are built in.
// Tables must pass validate() before use.
struct ScoreTable {
  OutputSpec fta;
  OutputSpec nca;
  OutputSpec nvca;

  // Returns every violation found (empty means valid) and marks the
  // table usable on success. Messages name the offending entry.
  std::vector<std::string> validate();
  [[nodiscard]] bool is_validated() const { return validated_; }

 private:
  bool validated_ = false;
};

// Parses and validates a table document; throws ValidationError listing
// all violations. Expected shape:
//   {"outputs": {"fta": {"range": [1,6], "points": {...}, "cutpoints": [...]},
//                "nca": {...}, "nvca": {...}}}
// Point specs: bool fields take a number; count fields take
// {"steps": [...]} (nondecreasing); age_at_arrest takes
// {"bands": [{"max": 22, "points": 2}, ..., {"points": 0}]} where the
// final band has no "max".
ScoreTable table_from_json(const nlohmann::json& doc);

RiskScores score(const DefendantRecord& record, const ScoreTable& table);

// One JSON object per line: {"kind": "...", "date": "YYYY-MM-DD"} with
// optional "severity": "felony" | "misdemeanor". Blank lines are
// skipped; errors carry 1-based line numbers.
std::vector<HistoryEvent> parse_events_jsonl(std::istream& in);

}  // namespace rdl::scoring
