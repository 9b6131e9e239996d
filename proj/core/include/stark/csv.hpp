#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stark/criticality.hpp"

namespace stark {

inline constexpr const char* kSweepCsvHeader =
    "eta,L,N,h,qfi,cfi,gap,energy0,delta_h,richardson_err,residual,valid,"
    "wall_time";

// Sweep rows as CSV: the pinned column order above, floats as shortest
// round-trip decimals ("inf"/"nan" included), cfi blank when absent, valid
// as 1/0, '\n' line ends. Writing then reading reproduces the rows exactly.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& rows);
std::vector<SweepRecord> read_sweep_csv(std::istream& in);
void write_sweep_csv_file(const std::string& path,
                          const std::vector<SweepRecord>& rows);
std::vector<SweepRecord> read_sweep_csv_file(const std::string& path);

// One located QFI maximum per curve.
struct PeakRow {
  double eta = 0;
  int L = 0;
  int N = 0;
  PeakResult peak;
};

inline constexpr const char* kPeaksCsvHeader =
    "eta,L,N,h_max,qfi_max,bracket_lo,bracket_hi,grid_resolution,at_edge";

void write_peaks_csv(std::ostream& out, const std::vector<PeakRow>& rows);
std::vector<PeakRow> read_peaks_csv(std::istream& in);
void write_peaks_csv_file(const std::string& path,
                          const std::vector<PeakRow>& rows);
std::vector<PeakRow> read_peaks_csv_file(const std::string& path);

} // namespace stark
