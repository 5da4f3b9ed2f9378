#include "magswim/sim_record.hpp"

#include "magswim/core_model.hpp"

#include <algorithm>
#include <charconv>
#include <system_error>

namespace magswim {

std::vector<double> uniform_sample_times(double t_end, int n) {
    n = std::max(n, 2);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(i == n - 1 ? t_end : t_end * i / (n - 1));
    return out;
}

void emit_lab_frame_controls(SimRecord& record) {
    for (SimRow& row : record.rows) {
        const Vec2 lab = ControlField{row.h_par, row.h_perp}.to_lab(row.theta);
        row.h_x = lab.x();
        row.h_y = lab.y();
    }
}

namespace {

void append_number(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
    out.append(buf, res.ptr);
}

} // namespace

std::string to_csv(const SimRecord& record) {
    std::string out = sim_record_csv_header;
    out += '\n';
    for (const SimRow& r : record.rows) {
        const double cols[] = {r.t,     r.x,      r.y,   r.theta, r.alpha1, r.alpha2,
                               r.h_par, r.h_perp, r.h_x, r.h_y,   r.d_value};
        bool first = true;
        for (double v : cols) {
            if (!first) out += ',';
            first = false;
            append_number(out, v);
        }
        out += '\n';
    }
    return out;
}

} // namespace magswim
