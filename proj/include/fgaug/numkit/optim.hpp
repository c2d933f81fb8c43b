#pragma once

#include <string>
#include <vector>

#include "fgaug/numkit/layers.hpp"

namespace fgaug::numkit {

// Learning rate `lr` for epochs [begin, end).
struct ScheduleSegment {
  int begin = 0;
  int end = 0;
  double lr = 0;
  bool operator==(const ScheduleSegment&) const = default;
};

using Schedule = std::vector<ScheduleSegment>;

// Throws ConfigError when segments are empty-ranged, overlapping or not
// contiguous. An empty schedule is valid (zero epochs).
void validate_schedule(const Schedule& s, const std::string& what);
int schedule_begin(const Schedule& s);
int schedule_end(const Schedule& s);
double lr_at(const Schedule& s, int epoch);
// "0-12:1e-3, 12-16:1e-4"
Schedule parse_schedule(const std::string& text);
std::string format_schedule(const Schedule& s);
// Multiplies every boundary by factor and rounds to the nearest epoch.
Schedule scale_schedule(const Schedule& s, double factor);

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Sgd;
  double momentum = 0.9;  // sgd
  double beta1 = 0.5, beta2 = 0.999, eps = 1e-8;  // adam
  double weight_decay = 0;
};

// Keeps per-parameter state keyed by position in the parameter list, so the
// list must be the same on every step.
class Optimizer {
 public:
  Optimizer(std::vector<ParamRef> params, OptimizerConfig cfg);
  // Applies the accumulated gradients scaled by grad_scale, then zeroes them.
  void step(double lr, double grad_scale = 1.0);
  const std::vector<ParamRef>& params() const { return params_; }

 private:
  std::vector<ParamRef> params_;
  OptimizerConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

}  // namespace fgaug::numkit
