#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agn/network.hpp"

namespace agn {

struct AccuracyRow {
    double opt_lin = 0.0;
    double nn_mean = 0.0;
    double nn_sd = 0.0;
    double linear_best = 0.0;  // 1 - opt_lin
    double bayes = 0.0;        // 1 - bayes_risk
};

// Plot-data CSV with columns opt_lin,nn_mean,nn_sd,linear_best,bayes.
void write_accuracy_csv(const std::vector<AccuracyRow>& rows, const std::filesystem::path& path,
                        const std::string& comment);
std::vector<AccuracyRow> read_accuracy_csv(const std::filesystem::path& path);

/// Accuracy against OPT_lin with three curves: network (with error bars),
/// best linear classifier and Bayes optimal.
void write_accuracy_svg(const std::vector<AccuracyRow>& rows, const std::filesystem::path& path,
                        const std::string& comment);

struct DecisionRaster {
    std::size_t resolution = 300;
    double extent = 6.0;             // grid covers [-extent, extent]^2
    std::vector<int> sign;           // row-major, row 0 at x2 = -extent
    std::vector<double> confidence;  // logistic(|f|)

    // Cell centre coordinates.
    double coord(std::size_t index) const;
    int sign_at(std::size_t row, std::size_t col) const { return sign[row * resolution + col]; }
};

/// Evaluates sgn f and logistic(|f|) on the (x1, x2) plane, with any further
/// input coordinates set to 0.
DecisionRaster decision_raster(const NetworkParams& params, std::size_t resolution = 300, double extent = 6.0);

/// Fraction of cells with |x1| > min_abs_x1 whose sign differs from sgn(x1).
double raster_disagreement_with_x1(const DecisionRaster& raster, double min_abs_x1);

void write_raster_csv(const DecisionRaster& raster, const std::filesystem::path& path, const std::string& comment);
void write_raster_svg(const DecisionRaster& raster, const std::filesystem::path& path, const std::string& comment);

}  // namespace agn
