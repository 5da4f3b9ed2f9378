#pragma once

#include <string>
#include <vector>

namespace magswim {

/// One output sample. Fields are in internal units (µm, s, rad, field units).
struct SimRow {
    double t = 0.0;
    double x = 0.0, y = 0.0, theta = 0.0, alpha1 = 0.0, alpha2 = 0.0;
    double h_par = 0.0, h_perp = 0.0;
    double h_x = 0.0, h_y = 0.0;
    double d_value = 0.0;
};

struct SimRecord {
    std::vector<SimRow> rows;
};

/// n ≥ 2 evenly spaced times from 0 to t_end, the last one exactly t_end.
std::vector<double> uniform_sample_times(double t_end, int n);

/// Fills h_x, h_y from (h_par, h_perp) rotated by θ, row by row.
void emit_lab_frame_controls(SimRecord& record);

/// Column header of the CSV time series.
inline constexpr const char* sim_record_csv_header =
    "t,x,y,theta,alpha1,alpha2,h_par,h_perp,h_x,h_y,d_value";

/// CSV text with LF line endings and shortest round-trip number formatting.
std::string to_csv(const SimRecord& record);

} // namespace magswim
