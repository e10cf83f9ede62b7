#include "core/scoring.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace rdl::scoring {

namespace {

bool parse_int_field(std::string_view text, int& out) {
  const auto* begin = text.data();
  const auto* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::chrono::year_month_day to_ymd(const Date& d) {
  return std::chrono::year{d.year} / std::chrono::month{static_cast<unsigned>(d.month)} /
         std::chrono::day{static_cast<unsigned>(d.day)};
}

// Calendar shift used by the two-year lookback. A source day that does
// not exist in the target month (Feb 29) snaps to the month's last day.
Date years_before(const Date& d, int years) {
  Date shifted = d;
  shifted.year -= years;
  if (!shifted.valid()) {
    const auto last = std::chrono::year{shifted.year} /
                      std::chrono::month{static_cast<unsigned>(shifted.month)} /
                      std::chrono::last;
    shifted.day = static_cast<int>(static_cast<unsigned>(
        std::chrono::year_month_day{last}.day()));
  }
  return shifted;
}

constexpr std::array<std::pair<std::string_view, EventKind>, 6> kEventKinds{{
    {"ARREST", EventKind::kArrest},
    {"MISDEMEANOR_CONVICTION", EventKind::kMisdemeanorConviction},
    {"FELONY_CONVICTION", EventKind::kFelonyConviction},
    {"VIOLENT_CONVICTION", EventKind::kViolentConviction},
    {"FTA", EventKind::kFta},
    {"INCARCERATION_SENTENCE", EventKind::kIncarcerationSentence},
}};

constexpr std::array<std::string_view, 9> kFactorNames{
    "age_at_arrest",
    "current_violent_offense",
    "pending_charge_at_offense",
    "prior_misdemeanor",
    "prior_felony",
    "prior_violent_conviction_count",
    "fta_within_2yr_count",
    "fta_older_2yr_count",
    "prior_incarceration",
};

}  // namespace

Date Date::parse(std::string_view text) {
  Date d;
  const bool shape_ok = text.size() == 10 && text[4] == '-' && text[7] == '-' &&
                        parse_int_field(text.substr(0, 4), d.year) &&
                        parse_int_field(text.substr(5, 2), d.month) &&
                        parse_int_field(text.substr(8, 2), d.day);
  if (!shape_ok) {
    throw ValidationError("date: expected YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  if (!d.valid()) {
    throw ValidationError("date: '" + std::string(text) + "' is not a calendar date");
  }
  return d;
}

bool Date::valid() const { return to_ymd(*this).ok(); }

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

EventKind event_kind_from_string(std::string_view name) {
  for (const auto& [text, kind] : kEventKinds) {
    if (text == name) return kind;
  }
  throw ValidationError("event: unknown kind '" + std::string(name) + "'");
}

std::string_view event_kind_to_string(EventKind kind) {
  for (const auto& [text, k] : kEventKinds) {
    if (k == kind) return text;
  }
  throw ValidationError("event: unrepresentable kind value");
}

void DefendantRecord::validate() const {
  if (age_at_arrest < 0) throw ValidationError("record: age_at_arrest must be >= 0");
  if (prior_violent_conviction_count < 0) {
    throw ValidationError("record: prior_violent_conviction_count must be >= 0");
  }
  if (fta_within_2yr_count < 0) {
    throw ValidationError("record: fta_within_2yr_count must be >= 0");
  }
  if (fta_older_2yr_count < 0) {
    throw ValidationError("record: fta_older_2yr_count must be >= 0");
  }
}

DefendantRecord derive_factors(std::span<const HistoryEvent> events,
                               const CurrentCharge& current, const Date& as_of) {
  if (!as_of.valid()) throw ValidationError("derive_factors: as_of is not a valid date");
  if (current.age < 0) throw ValidationError("derive_factors: age must be >= 0");

  DefendantRecord record;
  record.age_at_arrest = current.age;
  record.current_violent_offense = current.violent_offense;
  record.pending_charge_at_offense = current.pending_charge;

  const Date fta_boundary = years_before(as_of, 2);
  for (const auto& event : events) {
    if (!event.date.valid()) {
      throw ValidationError("derive_factors: event has invalid date " + event.date.to_string());
    }
    if (event.date > as_of) {
      throw ValidationError("derive_factors: event dated " + event.date.to_string() +
                            " is after as_of " + as_of.to_string());
    }
    if (!(event.date < as_of)) continue;  // same-day events are not priors
    switch (event.kind) {
      case EventKind::kArrest:
        break;  // arrests without conviction feed no factor
      case EventKind::kMisdemeanorConviction:
        record.prior_misdemeanor = true;
        break;
      case EventKind::kFelonyConviction:
        record.prior_felony = true;
        break;
      case EventKind::kViolentConviction:
        record.prior_violent_conviction_count += 1;
        if (event.severity == Severity::kMisdemeanor) {
          record.prior_misdemeanor = true;
        } else {
          record.prior_felony = true;
        }
        break;
      case EventKind::kFta:
        if (event.date >= fta_boundary) {
          record.fta_within_2yr_count += 1;
        } else {
          record.fta_older_2yr_count += 1;
        }
        break;
      case EventKind::kIncarcerationSentence:
        record.prior_incarceration = true;
        break;
    }
  }
  return record;
}

FactorKind factor_kind(std::string_view field) {
  if (field == "age_at_arrest") return FactorKind::kAge;
  if (field == "prior_violent_conviction_count" || field == "fta_within_2yr_count" ||
      field == "fta_older_2yr_count") {
    return FactorKind::kCount;
  }
  if (std::find(kFactorNames.begin(), kFactorNames.end(), field) != kFactorNames.end()) {
    return FactorKind::kBool;
  }
  throw ValidationError("scoring: unknown factor '" + std::string(field) + "'");
}

int factor_value(const DefendantRecord& record, std::string_view field) {
  if (field == "age_at_arrest") return record.age_at_arrest;
  if (field == "current_violent_offense") return record.current_violent_offense ? 1 : 0;
  if (field == "pending_charge_at_offense") return record.pending_charge_at_offense ? 1 : 0;
  if (field == "prior_misdemeanor") return record.prior_misdemeanor ? 1 : 0;
  if (field == "prior_felony") return record.prior_felony ? 1 : 0;
  if (field == "prior_violent_conviction_count") return record.prior_violent_conviction_count;
  if (field == "fta_within_2yr_count") return record.fta_within_2yr_count;
  if (field == "fta_older_2yr_count") return record.fta_older_2yr_count;
  if (field == "prior_incarceration") return record.prior_incarceration ? 1 : 0;
  throw ValidationError("scoring: unknown factor '" + std::string(field) + "'");
}

std::span<const std::string_view> factor_names() { return kFactorNames; }

int PointSpec::evaluate(int value) const {
  switch (kind) {
    case FactorKind::kBool:
      return value != 0 ? bool_points : 0;
    case FactorKind::kCount: {
      const auto idx = std::min<std::size_t>(static_cast<std::size_t>(value), steps.size() - 1);
      return steps[idx];
    }
    case FactorKind::kAge:
      for (const auto& band : bands) {
        if (band.open || value <= band.max) return band.points;
      }
      throw NumericError("scoring: age band table has no catch-all band");
  }
  throw NumericError("scoring: unreachable point-spec kind");
}

int OutputSpec::raw_score(const DefendantRecord& record) const {
  int raw = 0;
  for (const auto& [field, spec] : points) raw += spec.evaluate(factor_value(record, field));
  return raw;
}

int OutputSpec::final_score(int raw) const {
  int s = range_min;
  for (const int cut : cutpoints) {
    if (cut <= raw) ++s;
  }
  return s;
}

namespace {

void validate_output(const OutputSpec& out, std::string_view name, int expect_min,
                     int expect_max, std::vector<std::string>& violations) {
  const std::string prefix = "output " + std::string(name) + ": ";
  if (out.range_min != expect_min || out.range_max != expect_max) {
    violations.push_back(prefix + "declared range [" + std::to_string(out.range_min) + "," +
                         std::to_string(out.range_max) + "] must be [" +
                         std::to_string(expect_min) + "," + std::to_string(expect_max) + "]");
  }
  const auto span = static_cast<std::size_t>(expect_max - expect_min);
  if (out.cutpoints.size() != span) {
    violations.push_back(prefix + "needs " + std::to_string(span) + " cutpoints, has " +
                         std::to_string(out.cutpoints.size()));
  }
  for (std::size_t i = 1; i < out.cutpoints.size(); ++i) {
    if (out.cutpoints[i] <= out.cutpoints[i - 1]) {
      violations.push_back(prefix + "cutpoints must be strictly increasing at index " +
                           std::to_string(i));
      break;
    }
  }
  for (const auto& [field, spec] : out.points) {
    const std::string where = prefix + "factor " + field + ": ";
    FactorKind expected;
    try {
      expected = factor_kind(field);
    } catch (const ValidationError&) {
      violations.push_back(where + "not one of the nine factors");
      continue;
    }
    if (spec.kind != expected) {
      violations.push_back(where + "point spec shape does not match the field type");
      continue;
    }
    switch (spec.kind) {
      case FactorKind::kBool:
        if (spec.bool_points < 0) violations.push_back(where + "points must be >= 0");
        break;
      case FactorKind::kCount:
        if (spec.steps.empty()) {
          violations.push_back(where + "steps must be non-empty");
          break;
        }
        if (spec.steps.front() < 0) violations.push_back(where + "points must be >= 0");
        for (std::size_t i = 1; i < spec.steps.size(); ++i) {
          if (spec.steps[i] < spec.steps[i - 1]) {
            violations.push_back(where + "steps must be nondecreasing");
            break;
          }
        }
        break;
      case FactorKind::kAge: {
        if (spec.bands.empty()) {
          violations.push_back(where + "bands must be non-empty");
          break;
        }
        bool bands_ok = spec.bands.back().open;
        for (std::size_t i = 0; i + 1 < spec.bands.size(); ++i) {
          bands_ok = bands_ok && !spec.bands[i].open;
          if (i > 0 && spec.bands[i].max <= spec.bands[i - 1].max) bands_ok = false;
        }
        if (!bands_ok) {
          violations.push_back(where +
                               "bands must have strictly increasing maxes and end with a "
                               "catch-all band");
        }
        for (const auto& band : spec.bands) {
          if (band.points < 0) {
            violations.push_back(where + "points must be >= 0");
            break;
          }
        }
        break;
      }
    }
  }
}

}  // namespace

std::vector<std::string> ScoreTable::validate() {
  std::vector<std::string> violations;
  validate_output(fta, "fta", 1, 6, violations);
  validate_output(nca, "nca", 1, 6, violations);
  validate_output(nvca, "nvca", 0, 1, violations);
  validated_ = violations.empty();
  return violations;
}

namespace {

using nlohmann::json;

int require_int(const json& value, const std::string& where) {
  if (!value.is_number_integer()) throw ValidationError(where + ": expected an integer");
  return value.get<int>();
}

void reject_unknown_keys(const json& object, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (const auto& [key, unused] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
}

PointSpec parse_point_spec(const json& value, FactorKind kind, const std::string& where) {
  PointSpec spec;
  spec.kind = kind;
  switch (kind) {
    case FactorKind::kBool:
      spec.bool_points = require_int(value, where);
      break;
    case FactorKind::kCount: {
      if (!value.is_object() || !value.contains("steps") || !value["steps"].is_array()) {
        throw ValidationError(where + ": count factors take {\"steps\": [...]}");
      }
      reject_unknown_keys(value, {"steps"}, where);
      for (const auto& step : value["steps"]) {
        spec.steps.push_back(require_int(step, where + ".steps"));
      }
      break;
    }
    case FactorKind::kAge: {
      if (!value.is_object() || !value.contains("bands") || !value["bands"].is_array()) {
        throw ValidationError(where + ": age takes {\"bands\": [...]}");
      }
      reject_unknown_keys(value, {"bands"}, where);
      for (const auto& band_doc : value["bands"]) {
        if (!band_doc.is_object()) throw ValidationError(where + ".bands: expected objects");
        reject_unknown_keys(band_doc, {"max", "points"}, where + ".bands");
        PointSpec::AgeBand band;
        band.points = require_int(band_doc.at("points"), where + ".bands.points");
        if (band_doc.contains("max")) {
          band.max = require_int(band_doc["max"], where + ".bands.max");
        } else {
          band.open = true;
        }
        spec.bands.push_back(band);
      }
      break;
    }
  }
  return spec;
}

OutputSpec parse_output(const json& doc, const std::string& name) {
  const std::string where = "outputs." + name;
  if (!doc.is_object()) throw ValidationError(where + ": expected an object");
  reject_unknown_keys(doc, {"range", "points", "cutpoints"}, where);
  for (const char* key : {"range", "points", "cutpoints"}) {
    if (!doc.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
  }
  OutputSpec out;
  if (!doc["range"].is_array() || doc["range"].size() != 2) {
    throw ValidationError(where + ".range: expected [min, max]");
  }
  out.range_min = require_int(doc["range"][0], where + ".range");
  out.range_max = require_int(doc["range"][1], where + ".range");
  if (!doc["points"].is_object()) throw ValidationError(where + ".points: expected an object");
  for (const auto& [field, value] : doc["points"].items()) {
    const std::string factor_where = where + ".points." + field;
    FactorKind kind = FactorKind::kBool;
    try {
      kind = factor_kind(field);
    } catch (const ValidationError&) {
      throw ValidationError(factor_where + ": not one of the nine factors");
    }
    out.points.emplace(field, parse_point_spec(value, kind, factor_where));
  }
  if (!doc["cutpoints"].is_array()) {
    throw ValidationError(where + ".cutpoints: expected an array");
  }
  for (const auto& cut : doc["cutpoints"]) {
    out.cutpoints.push_back(require_int(cut, where + ".cutpoints"));
  }
  return out;
}

}  // namespace

ScoreTable table_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("outputs") || !doc["outputs"].is_object()) {
    throw ValidationError("score table: expected {\"outputs\": {...}}");
  }
  reject_unknown_keys(doc, {"outputs"}, "score table");
  reject_unknown_keys(doc["outputs"], {"fta", "nca", "nvca"}, "outputs");
  for (const char* key : {"fta", "nca", "nvca"}) {
    if (!doc["outputs"].contains(key)) {
      throw ValidationError(std::string("outputs: missing '") + key + "'");
    }
  }
  ScoreTable table;
  table.fta = parse_output(doc["outputs"]["fta"], "fta");
  table.nca = parse_output(doc["outputs"]["nca"], "nca");
  table.nvca = parse_output(doc["outputs"]["nvca"], "nvca");
  const auto violations = table.validate();
  if (!violations.empty()) {
    std::string message = "score table invalid:";
    for (const auto& v : violations) message += "\n  - " + v;
    throw ValidationError(message);
  }
  return table;
}

RiskScores score(const DefendantRecord& record, const ScoreTable& table) {
  record.validate();
  if (!table.is_validated()) throw ValidationError("score: table has not been validated");
  RiskScores scores;
  scores.fta = table.fta.final_score(table.fta.raw_score(record));
  scores.nca = table.nca.final_score(table.nca.raw_score(record));
  scores.nvca = table.nvca.final_score(table.nvca.raw_score(record));
  return scores;
}

std::vector<HistoryEvent> parse_events_jsonl(std::istream& in) {
  std::vector<HistoryEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "events line " + std::to_string(line_no);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& err) {
      throw ValidationError(where + ": " + err.what());
    }
    try {
      if (!doc.is_object()) throw ValidationError("expected an object");
      reject_unknown_keys(doc, {"kind", "date", "severity"}, "event");
      if (!doc.contains("kind") || !doc["kind"].is_string()) {
        throw ValidationError("missing string 'kind'");
      }
      if (!doc.contains("date") || !doc["date"].is_string()) {
        throw ValidationError("missing string 'date'");
      }
      HistoryEvent event;
      event.kind = event_kind_from_string(doc["kind"].get<std::string>());
      event.date = Date::parse(doc["date"].get<std::string>());
      if (doc.contains("severity")) {
        const auto sev = doc["severity"].get<std::string>();
        if (sev == "felony") {
          event.severity = Severity::kFelony;
        } else if (sev == "misdemeanor") {
          event.severity = Severity::kMisdemeanor;
        } else {
          throw ValidationError("severity must be 'felony' or 'misdemeanor'");
        }
      }
      events.push_back(event);
    } catch (const ValidationError& err) {
      throw ValidationError(where + ": " + err.what());
    }
  }
  return events;
}

}  // namespace rdl::scoring
