#pragma once

#include <array>
#include <filesystem>

#include <json.hpp>

#include "floorpp/plan.hpp"

namespace floorpp {

struct MetricsConfig {
  std::array<double, 3> tolerances{0.05, 0.1, 0.2};  // meters, ascending
  double iou_cell = 0.05;
  double iou_thickness = 0.1;
};

struct EvalReport {
  std::array<double, 3> tolerances{};
  std::array<double, 3> precision{};
  std::array<double, 3> recall{};
  double iou = 0.0;
  double betti_error = 0.0;
};

struct PrecisionRecall {
  std::array<double, 3> precision{};
  std::array<double, 3> recall{};
};

/// Number of one-to-one matches within tolerance, matching closest pairs
/// first (ties broken by predicted then ground-truth index).
int count_corner_matches(const FloorPlan& pred, const FloorPlan& gt, double tolerance);

/// Corner precision/recall per tolerance tier. Empty pred gives precision 0,
/// empty gt gives recall 0.
PrecisionRecall corner_pr(const FloorPlan& pred, const FloorPlan& gt,
                          const std::array<double, 3>& tolerances);

/// Wall-pixel IoU. Both plans are rasterized on the grid spanning their union
/// bounds padded by the wall thickness; a pixel is wall when its center lies
/// within thickness / 2 of an edge segment. Two empty rasters give 1.
double wall_iou(const FloorPlan& pred, const FloorPlan& gt, double cell, double thickness);

struct BettiNumbers {
  int b0 = 0;  // connected components (isolated corners included)
  int b1 = 0;  // independent cycles, E - V + b0
};
BettiNumbers betti_numbers(const FloorPlan& plan);

/// |b0_pred - b0_gt| + |b1_pred - b1_gt|
double betti_error(const FloorPlan& pred, const FloorPlan& gt);

EvalReport evaluate(const FloorPlan& pred, const FloorPlan& gt, const MetricsConfig& config = {});

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
void save_report(const EvalReport& report, const std::filesystem::path& path);

}  // namespace floorpp
