#ifndef KINKSCAN_IO_HPP
#define KINKSCAN_IO_HPP

#include <string>
#include <vector>

#include "kinkscan/estimator.hpp"
#include "kinkscan/experiments.hpp"
#include "kinkscan/kernel.hpp"
#include "kinkscan/lrd.hpp"
#include "kinkscan/scenario.hpp"

namespace kinkscan {

// 17 significant digits; round-trips 64-bit floats.
std::string format_double(double v);

// Write-then-rename so interrupted runs leave no partial files.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Dataset CSV with header x,y or x,y,eps,F.
std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(const std::string& content);
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

// Single-column series CSV with header xi.
std::string series_to_csv(const LrdSeries& series);
void write_series_csv(const LrdSeries& series, const std::string& path);

// Kink estimate list as JSON.
std::string estimates_to_json(const std::vector<KinkEstimate>& estimates,
                              const EstimatorConfig& config, std::size_t n,
                              double threshold);

std::string verification_to_json(const KernelVerification& report, int order);

// Monte Carlo exports: CSV body plus JSON summary. Every CSV starts with a
// comment line carrying the master seed and a hash of the generating config.
std::string rate_study_to_csv(const RateStudyResult& r, std::span<const std::size_t> n_list,
                              const std::string& config_hash);
std::string rate_study_to_json(const RateStudyResult& r, double slope_min, double slope_max,
                               const std::string& config_hash);
std::string calibration_to_csv(const CalibrationResult& r, const std::string& config_hash);
std::string calibration_to_json(const CalibrationResult& r, double cdf_tol,
                                double max_false_alarm, const std::string& config_hash);
std::string clt_to_csv(const CltResult& r, const std::string& config_hash);
std::string clt_to_json(const CltResult& r, double ks_max, const std::string& config_hash);

// Minimal SVG line plot of a kappa profile (t vs kappa-hat).
std::string profile_to_svg(const KappaProfile& profile);

// FNV-1a of a canonical string; used to stamp outputs with their config.
std::string fnv1a_hex(const std::string& text);

} // namespace kinkscan

#endif
