#include "maxstorm/cli/field_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "maxstorm/errors.hpp"

namespace maxstorm::cli {

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  throw ValidationError("field csv line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& s, std::size_t line) {
  const std::string t = boost::trim_copy(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) bad_line(line, "cannot parse '" + s + "' as a number");
  return v;
}

std::int64_t parse_date(const std::string& s, std::size_t line) {
  const std::string t = boost::trim_copy(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) bad_line(line, "cannot parse '" + s + "' as an integer date");
  return v;
}

template <class Site, class MakeSite>
SpaceTimeField<Site> parse_rows(const std::vector<std::string>& lines, std::size_t n_coords, MakeSite make_site) {
  SpaceTimeField<Site> field;
  std::size_t site_index = 0;
  bool first_date_done = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (boost::trim_copy(lines[i]).empty()) continue;
    std::vector<std::string> cells;
    boost::split(cells, lines[i], boost::is_any_of(","));
    if (cells.size() != n_coords + 2) {
      bad_line(line_no, "expected " + std::to_string(n_coords + 2) + " columns, found " + std::to_string(cells.size()));
    }
    const std::int64_t date = parse_date(cells[0], line_no);
    std::array<double, 3> c{};
    for (std::size_t k = 0; k < n_coords; ++k) c[k] = parse_number(cells[k + 1], line_no);
    const double value = parse_number(cells[n_coords + 1], line_no);
    if (!(value > 0.0) || !std::isfinite(value)) bad_line(line_no, "value must be positive and finite");

    if (field.dates.empty() || date != field.dates.back()) {
      if (!field.dates.empty()) {
        if (date <= field.dates.back()) bad_line(line_no, "dates must be strictly increasing");
        if (site_index != field.sites.size()) bad_line(line_no, "previous date lists fewer sites than the first date");
        first_date_done = true;
      }
      field.dates.push_back(date);
      site_index = 0;
    }
    Site site;
    try {
      site = make_site(c);
    } catch (const ValidationError& e) {
      bad_line(line_no, e.what());
    }
    if (!first_date_done) {
      field.sites.push_back(site);
    } else {
      if (site_index >= field.sites.size()) bad_line(line_no, "more sites than on the first date");
      if (!(site == field.sites[site_index])) bad_line(line_no, "site order differs from the first date");
    }
    ++site_index;
    field.values.push_back(value);
  }
  if (field.dates.empty()) throw ValidationError("field csv has no data rows");
  if (site_index != field.sites.size()) throw ValidationError("field csv: last date lists fewer sites than the first");
  field.validate();
  return field;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return {buf.data(), ptr};
}

std::string field_to_csv(const PlanarSpaceTimeField& field) {
  std::string out = "t,x1,x2,value\n";
  for (std::size_t n = 0; n < field.n_dates(); ++n) {
    for (std::size_t m = 0; m < field.n_sites(); ++m) {
      out += std::to_string(field.dates[n]) + ',' + format_double(field.sites[m].x1) + ',' +
             format_double(field.sites[m].x2) + ',' + format_double(field.at(n, m)) + '\n';
    }
  }
  return out;
}

std::string field_to_csv(const SphereSpaceTimeField& field) {
  std::string out = "t,vx,vy,vz,value\n";
  for (std::size_t n = 0; n < field.n_dates(); ++n) {
    for (std::size_t m = 0; m < field.n_sites(); ++m) {
      const auto& v = field.sites[m].vec();
      out += std::to_string(field.dates[n]) + ',' + format_double(v.x()) + ',' + format_double(v.y()) + ',' +
             format_double(v.z()) + ',' + format_double(field.at(n, m)) + '\n';
    }
  }
  return out;
}

AnyField parse_field_csv(const std::string& text) {
  std::vector<std::string> lines;
  boost::split(lines, text, boost::is_any_of("\n"));
  for (auto& l : lines) boost::trim_right_if(l, boost::is_any_of("\r"));
  if (lines.empty()) throw ValidationError("field csv is empty");
  const std::string header = boost::trim_copy(lines[0]);
  if (header == "t,x1,x2,value") {
    return parse_rows<PlanarSite>(lines, 2, [](const std::array<double, 3>& c) { return PlanarSite(c[0], c[1]); });
  }
  if (header == "t,vx,vy,vz,value") {
    return parse_rows<SphereSite>(lines, 3,
                                  [](const std::array<double, 3>& c) { return SphereSite(c[0], c[1], c[2]); });
  }
  bad_line(1, "header must be 't,x1,x2,value' or 't,vx,vy,vz,value'");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AnyField read_field_file(const std::filesystem::path& path) { return parse_field_csv(read_text_file(path)); }

}  // namespace maxstorm::cli
