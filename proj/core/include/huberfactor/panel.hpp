#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace huberfactor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// N x T observation matrix: rows are series, columns are time points.
///
/// Construction rejects empty panels, non-finite entries and label lists whose
/// lengths disagree with the matrix. Once built, a Panel is immutable.
class Panel {
public:
    Panel(Matrix values, std::vector<std::string> series_ids, std::vector<std::string> time_ids);

    /// Panel with generated labels `s1..sN` and `t1..tT`.
    explicit Panel(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& series_ids() const noexcept { return series_ids_; }
    const std::vector<std::string>& time_ids() const noexcept { return time_ids_; }

    Index n_series() const noexcept { return values_.rows(); }
    Index n_times() const noexcept { return values_.cols(); }

    /// Columns [first, first + count) as a new panel, labels carried along.
    Panel time_slice(Index first, Index count) const;

private:
    Matrix values_;
    std::vector<std::string> series_ids_;
    std::vector<std::string> time_ids_;
};

/// Parses the panel CSV layout: header `time,<id_1>,...,<id_N>`, then one row
/// per time point holding the label followed by N finite decimals.
/// Errors are reported as DataError with the offending 1-based file row.
Panel parse_panel_csv(std::istream& in);
Panel read_panel_csv(const std::filesystem::path& path);

void write_panel_csv(std::ostream& out, const Panel& panel);
void write_panel_csv(const std::filesystem::path& path, const Panel& panel);

/// Shortest round-trip decimal representation, independent of the C locale.
std::string format_double(double value);

}  // namespace huberfactor
