#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hifd/types.hpp"

namespace hifd {

// ---------------------------------------------------------------------------
// CSV interchange. Header row names the channels: time, u0b, then feeder
// columns (the transformer channel is just another column). Values round-trip
// bit-exactly through %.17g.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        s = a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    }
    return out;
}

inline double parse_double(const std::string& s, long row) {
    if (s.empty()) throw ingestion_error("empty cell", row);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ingestion_error("cannot parse number '" + s + "'", row);
    return v;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

struct CsvOptions {
    double f0 = 50.0;
    NeutralType neutral = NeutralType::Resonant;
    double expected_fs = 0.0;  ///< cross-check against the inferred rate when > 0
};

inline SynchronizedRecord ingest_csv(const std::string& path, const CsvOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) throw ingestion_error("cannot open '" + path + "'");

    std::string line;
    long row = 0;
    if (!std::getline(in, line)) throw ingestion_error("file is empty", 1);
    ++row;
    const auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "time")
        throw ingestion_error("header must start with 'time' and name channels", row);
    long u0b_col = -1;
    for (std::size_t i = 1; i < header.size(); ++i)
        if (header[i] == "u0b") u0b_col = static_cast<long>(i);
    if (u0b_col < 0) throw ingestion_error("missing u0b column", row);

    std::vector<double> time;
    std::vector<std::vector<double>> cols(header.size() - 1);
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ingestion_error("expected " + std::to_string(header.size()) + " cells, got " +
                                      std::to_string(cells.size()),
                                  row);
        time.push_back(detail::parse_double(cells[0], row));
        for (std::size_t i = 1; i < cells.size(); ++i)
            cols[i - 1].push_back(detail::parse_double(cells[i], row));
    }
    if (time.size() < 2) throw ingestion_error("need at least two sample rows", row);

    // uniform time base, tolerance 1 ppm of the step
    const double dt = time[1] - time[0];
    if (!(dt > 0.0)) throw ingestion_error("non-increasing time column", 3);
    for (std::size_t n = 1; n < time.size(); ++n) {
        const double step = time[n] - time[n - 1];
        if (std::abs(step - dt) > 1e-6 * dt)
            throw ingestion_error("non-uniform timestep", static_cast<long>(n) + 2);
    }
    double fs = 1.0 / dt;
    // recorder rates are integral in Hz; snap away the 1/dt rounding residue
    if (std::abs(fs - std::round(fs)) < 1e-6 * fs) fs = std::round(fs);
    if (opt.expected_fs > 0.0 && std::abs(fs - opt.expected_fs) > 1e-6 * opt.expected_fs)
        throw ingestion_error("sampling rate " + std::to_string(fs) +
                              " does not match configured " + std::to_string(opt.expected_fs));

    SynchronizedRecord rec;
    rec.neutral = opt.neutral;
    for (std::size_t i = 1; i < header.size(); ++i) {
        SampleSeries s(std::move(cols[i - 1]), fs, opt.f0, time[0]);
        if (static_cast<long>(i) == u0b_col)
            rec.u0b = std::move(s);
        else
            rec.feeders.emplace_back(header[i], std::move(s));
    }
    rec.validate();
    return rec;
}

inline void export_csv(const SynchronizedRecord& rec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ingestion_error("cannot write '" + path + "'");
    out << "time,u0b";
    for (const auto& [id, s] : rec.feeders) out << ',' << id;
    out << '\n';
    const double dt = 1.0 / rec.u0b.fs;
    for (std::size_t n = 0; n < rec.u0b.values.size(); ++n) {
        out << detail::format_double(rec.u0b.t0 + static_cast<double>(n) * dt);
        out << ',' << detail::format_double(rec.u0b.values[n]);
        for (const auto& [id, s] : rec.feeders) out << ',' << detail::format_double(s.values[n]);
        out << '\n';
    }
    if (!out) throw ingestion_error("write failed for '" + path + "'");
}

}  // namespace hifd
