#pragma once

#include "womble/graph.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace womble {

/// Longitudinal visual-field series for one eye: y(i, t) is the DLS in dB
/// at graph location i on visit t; zeros are censored.
struct VfSeries {
  Eigen::MatrixXd y;     // n x nu
  Eigen::VectorXd days;  // nu, days[0] = 0, strictly increasing

  Index num_locations() const { return y.rows(); }
  Index num_visits() const { return y.cols(); }
  bool censored(Index i, Index t) const { return y(i, t) == 0.0; }

  /// Throws std::invalid_argument on a broken invariant.
  void validate() const;

  /// Visits with day <= max_day.
  VfSeries truncated(double max_day) const;
};

struct PatientSeries {
  std::string patient;
  VfSeries series;
};

/// Long-format table `patient,visit,day,location,dls_db`. `location` is the
/// graph file id. Every visit must report every informative location.
/// Patients are returned in first-appearance order.
std::vector<PatientSeries> read_series(const std::string& path, const ArealGraph& graph);

void write_series(const std::vector<PatientSeries>& cohort, const ArealGraph& graph,
                  const std::string& path);

/// `patient,label` with label in {0, 1}.
std::vector<std::pair<std::string, int>> read_labels(const std::string& path);

}  // namespace womble
