#include "huberfactor/panel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "huberfactor/errors.hpp"

namespace huberfactor {

namespace {

std::vector<std::string> numbered_labels(const char* prefix, Index count) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(count));
    for (Index k = 0; k < count; ++k) {
        labels.push_back(prefix + std::to_string(k + 1));
    }
    return labels;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

Panel::Panel(Matrix values, std::vector<std::string> series_ids, std::vector<std::string> time_ids)
    : values_(std::move(values)), series_ids_(std::move(series_ids)), time_ids_(std::move(time_ids)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw ValidationError("Panel: need N >= 1 and T >= 1, got " + std::to_string(values_.rows()) +
                              "x" + std::to_string(values_.cols()));
    }
    if (static_cast<Index>(series_ids_.size()) != values_.rows()) {
        throw ValidationError("Panel: " + std::to_string(series_ids_.size()) + " series labels for " +
                              std::to_string(values_.rows()) + " rows");
    }
    if (static_cast<Index>(time_ids_.size()) != values_.cols()) {
        throw ValidationError("Panel: " + std::to_string(time_ids_.size()) + " time labels for " +
                              std::to_string(values_.cols()) + " columns");
    }
    for (Index t = 0; t < values_.cols(); ++t) {
        for (Index i = 0; i < values_.rows(); ++i) {
            if (!std::isfinite(values_(i, t))) {
                throw ValidationError("Panel: non-finite value at series " + series_ids_[i] + ", time " +
                                      time_ids_[t]);
            }
        }
    }
}

Panel::Panel(Matrix values)
    : Panel(values, numbered_labels("s", values.rows()), numbered_labels("t", values.cols())) {}

Panel Panel::time_slice(Index first, Index count) const {
    if (first < 0 || count < 1 || first + count > n_times()) {
        throw DimensionError("Panel::time_slice: [" + std::to_string(first) + ", " +
                             std::to_string(first + count) + ") outside T=" + std::to_string(n_times()));
    }
    std::vector<std::string> times(time_ids_.begin() + first, time_ids_.begin() + first + count);
    return Panel(values_.middleCols(first, count), series_ids_, std::move(times));
}

Panel parse_panel_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("panel CSV: empty input (row 1 missing header)");
    }
    const auto header = split_fields(trim(line));
    if (header.size() < 2 || trim(header[0]) != "time") {
        throw DataError("panel CSV: row 1 must be `time,<series_id>,...`");
    }
    std::vector<std::string> series_ids;
    for (std::size_t k = 1; k < header.size(); ++k) {
        series_ids.emplace_back(trim(header[k]));
    }
    const std::size_t n = series_ids.size();

    std::vector<std::string> time_ids;
    std::vector<double> cells;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const std::string_view content = trim(line);
        if (content.empty()) continue;
        const auto fields = split_fields(content);
        if (fields.size() != n + 1) {
            throw DataError("panel CSV: row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(n + 1));
        }
        time_ids.emplace_back(trim(fields[0]));
        for (std::size_t k = 1; k <= n; ++k) {
            const std::string_view cell = trim(fields[k]);
            double value = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
                throw DataError("panel CSV: row " + std::to_string(row) + ", column " + std::to_string(k + 1) +
                                ": not a finite number: '" + std::string(cell) + "'");
            }
            cells.push_back(value);
        }
    }
    if (time_ids.empty()) {
        throw DataError("panel CSV: no data rows");
    }
    const auto t_count = static_cast<Index>(time_ids.size());
    Matrix values(static_cast<Index>(n), t_count);
    for (Index t = 0; t < t_count; ++t) {
        for (Index i = 0; i < static_cast<Index>(n); ++i) {
            values(i, t) = cells[static_cast<std::size_t>(t) * n + static_cast<std::size_t>(i)];
        }
    }
    return Panel(std::move(values), std::move(series_ids), std::move(time_ids));
}

Panel read_panel_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open panel CSV '" + path.string() + "'");
    }
    return parse_panel_csv(in);
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
    out << "time";
    for (const auto& id : panel.series_ids()) out << ',' << id;
    out << '\n';
    const Matrix& y = panel.values();
    for (Index t = 0; t < panel.n_times(); ++t) {
        out << panel.time_ids()[t];
        for (Index i = 0; i < panel.n_series(); ++i) out << ',' << format_double(y(i, t));
        out << '\n';
    }
}

void write_panel_csv(const std::filesystem::path& path, const Panel& panel) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    write_panel_csv(out, panel);
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

}  // namespace huberfactor
