#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hardy {

/// Atomic file write: temp file in the same directory, then rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Shortest-roundtrip double formatting (deterministic across runs).
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Incremental CSV builder with a fixed header.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& header) { out_ << header << "\n"; }

    template <class... Ts>
    void row(Ts... vals) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(vals), first = false), ...);
        out_ << "\n";
    }

    std::string str() const { return out_.str(); }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    std::ostringstream out_;
};

/// gnuplot script plotting a mu curve against the plateau line.
inline std::string gnuplot_mu_curve(const std::string& csv_name, double plateau) {
    std::ostringstream out;
    out << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set xlabel 'lambda'\n"
        << "set ylabel 'mu'\n"
        << "plot '" << csv_name << "' using 1:2 with linespoints title 'mu(lambda)', \\\n"
        << "     " << format_double(plateau) << " with lines dashtype 2 title 'plateau'\n";
    return out.str();
}

/// gnuplot script for sign-sweep margin profiles.
inline std::string gnuplot_margins(const std::string& csv_name) {
    std::ostringstream out;
    out << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set logscale x\n"
        << "set xlabel 'delta_tilde'\n"
        << "set ylabel 'normalized margin'\n"
        << "plot '" << csv_name << "' using 1:2 with points title 'margin', 0 with lines\n";
    return out.str();
}

}  // namespace hardy
