#include "stark/csv.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "stark/errors.hpp"
#include "stark/numformat.hpp"

namespace stark {

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(',', pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

[[noreturn]] void bad_row(const char* what, std::size_t lineno,
                          std::string_view line) {
  throw InvalidArguments(std::string(what) + " at line " +
                         std::to_string(lineno) + ": '" + std::string(line) +
                         "'");
}

// Reads lines, checks the header, hands each data row to `fn`.
template <typename Fn>
void read_rows(std::istream& in, const char* header, Fn&& fn) {
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw InvalidArguments(std::string("csv: missing or wrong header, want '") +
                           header + "'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    fn(split_row(line), lineno, std::string_view(line));
  }
}

bool parse_flag(std::string_view s, std::size_t lineno, std::string_view line) {
  if (s == "1") return true;
  if (s == "0") return false;
  bad_row("csv: flag must be 0 or 1", lineno, line);
}

} // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const SweepRecord& r : rows) {
    out << format_double(r.eta) << ',' << r.L << ',' << r.N << ','
        << format_double(r.h) << ',' << format_double(r.qfi) << ',';
    if (r.cfi) out << format_double(*r.cfi);
    out << ',' << format_double(r.gap) << ',' << format_double(r.energy0)
        << ',' << format_double(r.delta_h) << ','
        << format_double(r.richardson_err) << ',' << format_double(r.residual)
        << ',' << (r.valid ? '1' : '0') << ',' << format_double(r.wall_time)
        << '\n';
  }
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
  std::vector<SweepRecord> rows;
  read_rows(in, kSweepCsvHeader,
            [&](const std::vector<std::string_view>& f, std::size_t lineno,
                std::string_view line) {
              if (f.size() != 13) bad_row("csv: expected 13 fields", lineno, line);
              try {
                SweepRecord r;
                r.eta = parse_double(f[0]);
                r.L = static_cast<int>(parse_int(f[1]));
                r.N = static_cast<int>(parse_int(f[2]));
                r.h = parse_double(f[3]);
                r.qfi = parse_double(f[4]);
                if (!f[5].empty()) r.cfi = parse_double(f[5]);
                r.gap = parse_double(f[6]);
                r.energy0 = parse_double(f[7]);
                r.delta_h = parse_double(f[8]);
                r.richardson_err = parse_double(f[9]);
                r.residual = parse_double(f[10]);
                r.valid = parse_flag(f[11], lineno, line);
                r.wall_time = parse_double(f[12]);
                rows.push_back(r);
              } catch (const InvalidArguments&) {
                bad_row("csv: malformed number", lineno, line);
              }
            });
  return rows;
}

void write_sweep_csv_file(const std::string& path,
                          const std::vector<SweepRecord>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_sweep_csv(out, rows);
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

std::vector<SweepRecord> read_sweep_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_sweep_csv(in);
}

void write_peaks_csv(std::ostream& out, const std::vector<PeakRow>& rows) {
  out << kPeaksCsvHeader << '\n';
  for (const PeakRow& r : rows) {
    out << format_double(r.eta) << ',' << r.L << ',' << r.N << ','
        << format_double(r.peak.h_max) << ',' << format_double(r.peak.qfi_max)
        << ',' << format_double(r.peak.bracket_lo) << ','
        << format_double(r.peak.bracket_hi) << ','
        << format_double(r.peak.grid_resolution) << ','
        << (r.peak.at_edge ? '1' : '0') << '\n';
  }
}

std::vector<PeakRow> read_peaks_csv(std::istream& in) {
  std::vector<PeakRow> rows;
  read_rows(in, kPeaksCsvHeader,
            [&](const std::vector<std::string_view>& f, std::size_t lineno,
                std::string_view line) {
              if (f.size() != 9) bad_row("csv: expected 9 fields", lineno, line);
              try {
                PeakRow r;
                r.eta = parse_double(f[0]);
                r.L = static_cast<int>(parse_int(f[1]));
                r.N = static_cast<int>(parse_int(f[2]));
                r.peak.h_max = parse_double(f[3]);
                r.peak.qfi_max = parse_double(f[4]);
                r.peak.bracket_lo = parse_double(f[5]);
                r.peak.bracket_hi = parse_double(f[6]);
                r.peak.grid_resolution = parse_double(f[7]);
                r.peak.at_edge = parse_flag(f[8], lineno, line);
                rows.push_back(r);
              } catch (const InvalidArguments&) {
                bad_row("csv: malformed number", lineno, line);
              }
            });
  return rows;
}

void write_peaks_csv_file(const std::string& path,
                          const std::vector<PeakRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_peaks_csv(out, rows);
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

std::vector<PeakRow> read_peaks_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_peaks_csv(in);
}

} // namespace stark
