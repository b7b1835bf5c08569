#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "huberfactor/estimators.hpp"
#include "huberfactor/metrics.hpp"
#include "huberfactor/portfolio.hpp"
#include "huberfactor/rank_select.hpp"
#include "huberfactor/synth.hpp"

namespace huberfactor {

using Json = nlohmann::ordered_json;

Json to_json(const InnovationLaw& law);
InnovationLaw innovation_law_from_json(const Json& j);
Json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const Json& j);
Json to_json(const HuberConfig& cfg);
HuberConfig huber_config_from_json(const Json& j);

/// `{"r_hat": int, "sigma_diag": [...], "threshold": float, "method": "..."}`
Json to_json(const RankEstimate& est);
Json to_json(const McReport& report);
Json to_json(const BacktestReport& report);

/// Labelled matrix CSV: header `<label_name>,<prefix>1,...`, one row per label.
void write_labelled_csv(const std::filesystem::path& path, const std::string& label_name,
                        const std::vector<std::string>& labels, const Matrix& values, const std::string& prefix);

/// loadings.csv, factors.csv and meta.json for a fitted model.
void write_fit_directory(const std::filesystem::path& dir, const Panel& panel, const FitResult& result);
Json fit_meta(const FitResult& result);

/// `method,mee_cc,mee_cc_iqr,ave_fl,ave_fl_sd,ave_fs,ave_fs_sd` for fit
/// studies and `method,mean_rhat,under,over` for rank studies.
void write_mc_tables(std::ostream& fits, std::ostream& ranks, const McReport& report);

/// `time,return` rows.
void write_oos_returns_csv(const std::filesystem::path& path, const BacktestReport& report);

/// Pretty-printed JSON with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);

}  // namespace huberfactor
