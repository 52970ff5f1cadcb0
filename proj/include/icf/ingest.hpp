#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "io.hpp"

namespace icf {

enum class Label : int { healthy = 0, chf = 1 };

/// One subject's RR-interval record, seconds per beat.
struct TimeSeries {
    std::string id;
    std::vector<double> values;
    std::optional<Label> label;
    std::size_t dropped = 0;  ///< lines rejected by read_rr
};

struct Cohort {
    std::vector<TimeSeries> subjects;
    std::filesystem::path provenance;

    bool labeled() const {
        for (const auto& s : subjects)
            if (!s.label) return false;
        return !subjects.empty();
    }

    std::size_t count(Label l) const {
        std::size_t n = 0;
        for (const auto& s : subjects) n += (s.label == l);
        return n;
    }
};

inline std::string_view label_name(Label l) { return l == Label::healthy ? "healthy" : "chf"; }

struct ReadOptions {
    double max_drop_fraction = 0.10;
};

/// Parses RR text: one decimal interval per line, blank lines ignored.
/// Non-positive and non-numeric lines are dropped and counted.
inline TimeSeries parse_rr(std::string_view text, std::string id, const ReadOptions& opts = {}) {
    TimeSeries ts;
    ts.id = std::move(id);
    std::size_t nonblank = 0;
    for (auto line : io::lines(text)) {
        line = io::trim(line);
        if (line.empty()) continue;
        ++nonblank;
        auto v = io::parse_double(line);
        if (!v || !std::isfinite(*v) || *v <= 0.0) {
            ++ts.dropped;
            continue;
        }
        ts.values.push_back(*v);
    }
    if (nonblank > 0 &&
        static_cast<double>(ts.dropped) > opts.max_drop_fraction * static_cast<double>(nonblank)) {
        fail(ErrorKind::malformed_input,
             ts.id + ": " + std::to_string(ts.dropped) + " of " + std::to_string(nonblank) +
                 " lines rejected");
    }
    return ts;
}

inline TimeSeries read_rr(const std::filesystem::path& path, const ReadOptions& opts = {}) {
    return parse_rr(io::read_text(path), path.stem().string(), opts);
}

/// Reads a CSV manifest with header `id,path,label`. Relative paths are
/// resolved against the manifest's directory.
inline Cohort read_manifest(const std::filesystem::path& path, const ReadOptions& opts = {}) {
    const auto text = io::read_text(path);
    const auto rows = io::lines(text);
    Cohort cohort;
    cohort.provenance = path;
    std::size_t row_no = 0;
    bool header_seen = false;
    std::set<std::string, std::less<>> ids;
    for (auto raw : rows) {
        ++row_no;
        auto line = io::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != "id,path,label")
                fail(ErrorKind::validation, path.string() + ": header must be exactly id,path,label");
            header_seen = true;
            continue;
        }
        const auto cells = io::split_commas(line);
        if (cells.size() != 3)
            fail(ErrorKind::validation,
                 path.string() + " row " + std::to_string(row_no) + ": expected 3 fields");
        std::string id(io::trim(cells[0]));
        if (id.empty()) fail(ErrorKind::validation, path.string() + " row " + std::to_string(row_no) + ": empty id");
        if (!ids.insert(id).second)
            fail(ErrorKind::validation, path.string() + " row " + std::to_string(row_no) + ": duplicate id " + id);

        std::filesystem::path rr(std::string(io::trim(cells[1])));
        if (rr.is_relative()) rr = path.parent_path() / rr;
        if (!std::filesystem::exists(rr))
            fail(ErrorKind::io, path.string() + " row " + std::to_string(row_no) + ": missing file " + rr.string());

        const auto label = io::trim(cells[2]);
        std::optional<Label> lab;
        if (label == "healthy") lab = Label::healthy;
        else if (label == "chf") lab = Label::chf;
        else if (!label.empty())
            fail(ErrorKind::validation,
                 path.string() + " row " + std::to_string(row_no) + ": label must be healthy, chf or empty");

        TimeSeries ts = parse_rr(io::read_text(rr), id, opts);
        ts.label = lab;
        cohort.subjects.push_back(std::move(ts));
    }
    if (!header_seen) fail(ErrorKind::validation, path.string() + ": empty manifest");
    return cohort;
}

/// Guards the "both classes present" precondition of every training step.
inline void require_both_classes(const Cohort& c) {
    if (!c.labeled()) fail(ErrorKind::validation, "cohort has unlabeled subjects");
    if (c.count(Label::healthy) == 0 || c.count(Label::chf) == 0)
        fail(ErrorKind::validation, "cohort needs both healthy and chf subjects");
}

/// RR text emitter, 12 significant digits per line.
inline std::string format_rr(const TimeSeries& ts) {
    std::string out;
    out.reserve(ts.values.size() * 16);
    for (double v : ts.values) {
        out += io::format_double(v, 12);
        out += '\n';
    }
    return out;
}

}  // namespace icf
