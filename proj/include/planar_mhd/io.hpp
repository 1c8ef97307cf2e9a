#ifndef PLANAR_MHD_IO_HPP
#define PLANAR_MHD_IO_HPP

// Text outputs: diagnostics CSV, 8-column snapshots, key=value summaries and
// study tables (aligned text plus a CSV twin).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "planar_mhd/config.hpp"
#include "planar_mhd/core.hpp"
#include "planar_mhd/diagnostics.hpp"
#include "planar_mhd/initdata.hpp"

namespace planar_mhd {

using detail::format_real;

inline const std::vector<std::string>& diagnostics_fixed_columns() {
  static const std::vector<std::string> cols = {
      "time",       "mass",      "energy",    "entropy_fn", "entropy_prod_cum", "diss_visc",  "diss_shear",
      "diss_mag",   "diss_heat", "weighted_diss", "max_rho", "min_theta",        "max_theta", "rho_F_max"};
  return cols;
}

/// Fixed columns, then the norm keys in alphabetical order.
inline std::vector<std::string> diagnostics_columns(const DiagnosticsRecord& r) {
  auto cols = diagnostics_fixed_columns();
  for (const auto& [k, v] : r.norms) cols.push_back(k);
  return cols;
}

inline std::vector<double> diagnostics_values(const DiagnosticsRecord& r) {
  std::vector<double> v = {r.time,      r.mass,          r.energy,  r.entropy_fn, r.entropy_prod_cum,
                           r.diss_visc, r.diss_shear,    r.diss_mag, r.diss_heat, r.weighted_diss,
                           r.max_rho,   r.min_theta,     r.max_theta, r.rho_F_max};
  for (const auto& [k, x] : r.norms) v.push_back(x);
  return v;
}

inline void write_csv_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << format_real(values[i]);
  out << '\n';
}

/// Streams records as they arrive; the header is taken from the first record.
class DiagnosticsCsvWriter {
 public:
  explicit DiagnosticsCsvWriter(std::ostream& out) : out_(out) {}

  void write(const DiagnosticsRecord& r) {
    if (columns_.empty()) {
      columns_ = diagnostics_columns(r);
      for (std::size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
      out_ << '\n';
    } else if (diagnostics_columns(r) != columns_) {
      throw std::logic_error("diagnostics CSV: record keys changed mid-run");
    }
    write_csv_row(out_, diagnostics_values(r));
  }

 private:
  std::ostream& out_;
  std::vector<std::string> columns_;
};

/// Snapshot table: "# time = t" header, a column comment, then one row per
/// cell with 17 significant digits.
inline void write_snapshot(std::ostream& out, const State& s, const Grid& grid) {
  out << "# time = " << format_real(s.time()) << '\n';
  out << "# x rho u w1 w2 b1 b2 theta\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double row[8] = {grid.center(i), s.rho()[i],  s.u()[i],    s.w()[i][0],
                           s.w()[i][1],    s.b()[i][0], s.b()[i][1], s.theta()[i]};
    for (int c = 0; c < 8; ++c) out << (c ? " " : "") << format_real(row[c]);
    out << '\n';
  }
}

inline State read_snapshot(std::istream& in) {
  std::stringstream body;
  body << in.rdbuf();
  const std::string text = body.str();
  const std::string tag = "# time =";
  const auto pos = text.find(tag);
  if (pos != 0) throw DomainError("snapshot: missing '# time =' header");
  const auto eol = text.find('\n');
  const double t = detail::parse_real(std::string_view(text).substr(tag.size(), eol - tag.size()), "snapshot time");
  std::istringstream rows(text);
  const InitialData d = read_initial_table(rows);
  return State(t, d.rho0, d.u0, d.w0, d.b0, d.theta0);
}

inline State read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open snapshot '" + path.string() + "'");
  return read_snapshot(in);
}

/// Snapshot files (snapshot_*.txt) in a directory, sorted by name.
inline std::vector<std::filesystem::path> list_snapshots(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.rfind("snapshot_", 0) == 0 && e.path().extension() == ".txt") {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%04zu.txt", index);
  return buf;
}

/// Ordered key=value document.
class Summary {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& kv : entries_) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, double value) { set(key, format_real(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "yes" : "no")); }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Table with string cells. Text form pads every column to its widest cell;
/// CSV form is plain comma-separated.
struct StudyTable {
  std::string title;
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;

  void write_text(std::ostream& out) const {
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t c = 0; c < headers.size(); ++c) {
        const std::string cell = c < cells.size() ? cells[c] : "";
        out << (c ? "  " : "") << cell << std::string(width[c] - cell.size(), ' ');
      }
      out << '\n';
    };
    if (!title.empty()) out << "# " << title << '\n';
    line(headers);
    std::vector<std::string> rule;
    for (std::size_t w : width) rule.push_back(std::string(w, '-'));
    line(rule);
    for (const auto& r : rows) line(r);
  }

  void write_csv(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? "," : "") << cells[c];
      out << '\n';
    };
    line(headers);
    for (const auto& r : rows) line(r);
  }
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

inline void write_study(const std::filesystem::path& dir, const std::string& stem, const StudyTable& table) {
  std::ostringstream txt, csv;
  table.write_text(txt);
  table.write_csv(csv);
  write_file(dir / (stem + ".txt"), txt.str());
  write_file(dir / (stem + ".csv"), csv.str());
}

}  // namespace planar_mhd

#endif  // PLANAR_MHD_IO_HPP
