#include "idmauc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace idmauc {

namespace {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, std::size_t line_no, const char* what) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    std::ostringstream os;
    os << "line " << line_no << ": cannot parse " << what << " from '" << field << "'";
    throw IoError(os.str());
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

void expect_header(const std::string& line, const std::string& expected, const char* what) {
  if (split_csv(line) != split_csv(expected)) {
    std::ostringstream os;
    os << what << ": expected header '" << expected << "', got '" << line << "'";
    throw IoError(os.str());
  }
}

}  // namespace

std::vector<NamedRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("records: empty input (missing header)");
  expect_header(line, "id,visit_time,marker,survival_time,death_indicator", "records");

  struct Raw {
    std::vector<std::pair<double, int>> visits;
    double survival = 0.0;
    int death = 0;
    std::size_t order = 0;
  };
  std::map<std::string, Raw> groups;
  std::size_t line_no = 1;
  std::size_t order = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 5) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 5 fields, got " << fields.size();
      throw IoError(os.str());
    }
    double visit = parse_double(fields[1], line_no, "visit_time");
    double marker = parse_double(fields[2], line_no, "marker");
    double survival = parse_double(fields[3], line_no, "survival_time");
    double death = parse_double(fields[4], line_no, "death_indicator");
    auto [it, inserted] = groups.try_emplace(fields[0]);
    if (inserted) it->second.order = order++;
    it->second.visits.emplace_back(visit, static_cast<int>(marker));
    it->second.survival = survival;
    it->second.death = static_cast<int>(death);
  }

  std::vector<const std::pair<const std::string, Raw>*> ordered;
  ordered.reserve(groups.size());
  for (const auto& g : groups) ordered.push_back(&g);
  std::sort(ordered.begin(), ordered.end(),
            [](auto* a, auto* b) { return a->second.order < b->second.order; });

  std::vector<NamedRecord> out;
  std::vector<std::string> violations;
  for (const auto* g : ordered) {
    Raw raw = g->second;
    std::sort(raw.visits.begin(), raw.visits.end());
    std::vector<double> times;
    std::vector<int> marks;
    for (auto& [t, m] : raw.visits) {
      times.push_back(t);
      marks.push_back(m);
    }
    NamedRecord named;
    named.id = g->first;
    named.record = make_record(std::move(times), std::move(marks), raw.survival, raw.death);
    for (const auto& issue : validate_record(named.record))
      violations.push_back("subject '" + named.id + "': " + issue);
    out.push_back(std::move(named));
  }
  if (!violations.empty()) {
    std::ostringstream os;
    os << "records failed validation:";
    for (const auto& v : violations) os << "\n  " << v;
    throw IoError(os.str());
  }
  return out;
}

void write_records(std::span<const NamedRecord> records, std::ostream& out) {
  out << "id,visit_time,marker,survival_time,death_indicator\n";
  for (const auto& named : records) {
    const auto& r = named.record;
    for (std::size_t i = 0; i < r.visit_times.size(); ++i) {
      out << named.id << ',' << format_double(r.visit_times[i]) << ',' << r.marker[i] << ','
          << format_double(r.survival_time) << ',' << r.death_indicator << '\n';
    }
  }
  if (!out) throw IoError("records: write failed");
}

std::vector<NamedPath> read_paths(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("paths: empty input (missing header)");
  expect_header(line, "id,illness_time,death_time,exit_direct", "paths");
  std::vector<NamedPath> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 4) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 4 fields, got " << fields.size();
      throw IoError(os.str());
    }
    NamedPath p;
    p.id = fields[0];
    if (!fields[1].empty())
      p.path.illness_time = parse_double(fields[1], line_no, "illness_time");
    p.path.death_time = parse_double(fields[2], line_no, "death_time");
    p.path.exit_direct = parse_double(fields[3], line_no, "exit_direct") != 0.0;
    out.push_back(std::move(p));
  }
  return out;
}

void write_paths(std::span<const NamedPath> paths, std::ostream& out) {
  out << "id,illness_time,death_time,exit_direct\n";
  for (const auto& p : paths) {
    out << p.id << ',';
    if (p.path.illness_time) out << format_double(*p.path.illness_time);
    out << ',' << format_double(p.path.death_time) << ',' << (p.path.exit_direct ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("paths: write failed");
}

AucCurve read_curve(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("curve: empty input (missing header)");
  expect_header(line, "definition,estimator,window,time,value", "curve");
  AucCurve curve;
  bool first = true;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 5) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 5 fields, got " << fields.size();
      throw IoError(os.str());
    }
    AucDefinition def;
    if (fields[0] == "id") {
      def = AucDefinition::IncidentDynamic;
    } else if (fields[0] == "cd") {
      def = AucDefinition::CumulativeDynamic;
    } else {
      throw IoError("line " + std::to_string(line_no) + ": unknown definition '" + fields[0] +
                    "'");
    }
    std::optional<double> window;
    if (!fields[2].empty()) window = parse_double(fields[2], line_no, "window");
    if (first) {
      curve.definition = def;
      curve.estimator = fields[1];
      curve.window = window;
      first = false;
    } else if (def != curve.definition || fields[1] != curve.estimator) {
      throw IoError("line " + std::to_string(line_no) + ": mixed definitions in one curve file");
    }
    curve.points.push_back(
        {parse_double(fields[3], line_no, "time"), parse_double(fields[4], line_no, "value")});
  }
  return curve;
}

void write_curve(const AucCurve& curve, std::ostream& out) {
  out << "definition,estimator,window,time,value\n";
  const char* def = curve.definition == AucDefinition::IncidentDynamic ? "id" : "cd";
  for (const auto& pt : curve.points) {
    out << def << ',' << curve.estimator << ',';
    if (curve.window) out << format_double(*curve.window);
    out << ',' << format_double(pt.time) << ',' << format_double(pt.value) << '\n';
  }
  if (!out) throw IoError("curve: write failed");
}

ReportTable read_report(std::istream& in) {
  ReportTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("report: empty input (missing header)");
  table.header = split_csv(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_csv(line));
  }
  return table;
}

void write_report(const ReportTable& table, std::ostream& out) {
  auto write_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  if (!out) throw IoError("report: write failed");
}

VisitScheme standard_followup_scheme() {
  return {{{36.0, 3.0}, {60.0, 6.0}, {std::numeric_limits<double>::infinity(), 12.0}}};
}

std::vector<double> synthesize_visits(const VisitScheme& scheme, double until) {
  if (scheme.phases.empty()) throw std::invalid_argument("visit scheme has no phases");
  for (std::size_t i = 0; i < scheme.phases.size(); ++i) {
    if (!(scheme.phases[i].interval > 0.0))
      throw std::invalid_argument("visit scheme intervals must be positive");
    if (i > 0 && !(scheme.phases[i - 1].until < scheme.phases[i].until))
      throw std::invalid_argument("visit scheme phase ends must be ascending");
  }
  std::vector<double> visits{0.0};
  double t = 0.0;
  std::size_t phase = 0;
  while (true) {
    while (phase < scheme.phases.size() && t >= scheme.phases[phase].until) ++phase;
    if (phase >= scheme.phases.size()) break;
    t += scheme.phases[phase].interval;
    if (t > until) break;
    visits.push_back(t);
  }
  return visits;
}

double reconstruct_screening(double diagnosis_time, const VisitScheme& scheme) {
  if (!(diagnosis_time > 0.0))
    throw std::invalid_argument("reconstruct_screening needs diagnosis_time > 0");
  for (const auto& phase : scheme.phases)
    if (diagnosis_time <= phase.until)
      return std::max(0.0, diagnosis_time - phase.interval);
  return std::max(0.0, diagnosis_time - scheme.phases.back().interval);
}

ReconstructedInterval reconstruct_last_negative(double diagnosis_time, const VisitScheme& scheme) {
  double rule = reconstruct_screening(diagnosis_time, scheme);
  double last_grid = 0.0;
  for (double v : synthesize_visits(scheme, diagnosis_time))
    if (v < diagnosis_time) last_grid = v;
  ReconstructedInterval out;
  out.last_negative = std::max(rule, last_grid);
  out.adjusted = last_grid > rule;
  return out;
}

WeibullDiagnostic weibull_diagnostic(
    std::span<const std::pair<std::string, StepCumulativeHazard>> hazards) {
  WeibullDiagnostic diag;
  for (const auto& [label, hazard] : hazards) {
    WeibullDiagnostic::Transition tr;
    tr.label = label;
    double cum = 0.0;
    for (std::size_t i = 0; i < hazard.jump_times.size(); ++i) {
      cum += hazard.increments[i];
      if (hazard.jump_times[i] > 0.0 && cum > 0.0)
        tr.points.emplace_back(std::log(hazard.jump_times[i]), std::log(cum));
    }
    const std::size_t n = tr.points.size();
    if (n >= 2) {
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
      for (const auto& [x, y] : tr.points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
      }
      double nd = static_cast<double>(n);
      double var_x = sxx - sx * sx / nd;
      double var_y = syy - sy * sy / nd;
      double cov = sxy - sx * sy / nd;
      if (var_x > 0.0) {
        tr.has_line = true;
        tr.slope = cov / var_x;
        tr.intercept = (sy - tr.slope * sx) / nd;
        tr.r_squared = var_y > 0.0 ? (cov * cov) / (var_x * var_y) : 1.0;
      }
    }
    diag.transitions.push_back(std::move(tr));
  }
  return diag;
}

void write_diagnostic(const WeibullDiagnostic& diag, std::ostream& out) {
  out << "row_type,transition,x,y\n";
  for (const auto& tr : diag.transitions) {
    for (const auto& [x, y] : tr.points)
      out << "point," << tr.label << ',' << format_double(x) << ',' << format_double(y) << '\n';
    if (tr.has_line) {
      out << "slope," << tr.label << ',' << format_double(tr.slope) << ",\n";
      out << "intercept," << tr.label << ',' << format_double(tr.intercept) << ",\n";
      out << "r_squared," << tr.label << ',' << format_double(tr.r_squared) << ",\n";
    } else {
      out << "note," << tr.label << ",too few points for a slope,\n";
    }
  }
  if (!out) throw IoError("diagnostic: write failed");
}

}  // namespace idmauc
