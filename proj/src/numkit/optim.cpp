#include "fgaug/numkit/optim.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "fgaug/errors.hpp"

namespace fgaug::numkit {

void validate_schedule(const Schedule& s, const std::string& what) {
  std::vector<std::string> errs;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].begin < 0) errs.push_back(what + ": segment " + std::to_string(i) + " starts before epoch 0");
    if (s[i].end <= s[i].begin) errs.push_back(what + ": segment " + std::to_string(i) + " has an empty epoch range");
    if (!(s[i].lr > 0) || !std::isfinite(s[i].lr)) errs.push_back(what + ": segment " + std::to_string(i) + " has non-positive learning rate");
    if (i > 0 && s[i].begin < s[i - 1].end) errs.push_back(what + ": segments " + std::to_string(i - 1) + " and " + std::to_string(i) + " overlap");
    if (i > 0 && s[i].begin > s[i - 1].end) errs.push_back(what + ": gap between segments " + std::to_string(i - 1) + " and " + std::to_string(i));
  }
  if (!errs.empty()) {
    std::string msg;
    for (const auto& e : errs) msg += (msg.empty() ? "" : "; ") + e;
    throw ConfigError(msg);
  }
}

int schedule_begin(const Schedule& s) { return s.empty() ? 0 : s.front().begin; }
int schedule_end(const Schedule& s) { return s.empty() ? 0 : s.back().end; }

double lr_at(const Schedule& s, int epoch) {
  for (const auto& seg : s)
    if (epoch >= seg.begin && epoch < seg.end) return seg.lr;
  throw ContractError("lr_at: epoch " + std::to_string(epoch) + " outside the schedule");
}

Schedule parse_schedule(const std::string& text) {
  Schedule out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
    ScheduleSegment seg;
    char dash = 0, colon = 0;
    std::istringstream is(item);
    if (!(is >> seg.begin >> dash >> seg.end >> colon >> seg.lr) || dash != '-' || colon != ':' ||
        !(is >> std::ws).eof()) {
      throw ConfigError("malformed schedule segment '" + item + "' (expected begin-end:lr)");
    }
    out.push_back(seg);
  }
  return out;
}

std::string format_schedule(const Schedule& s) {
  std::string out;
  for (const auto& seg : s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d-%d:%g", seg.begin, seg.end, seg.lr);
    out += (out.empty() ? "" : ", ") + std::string(buf);
  }
  return out;
}

Schedule scale_schedule(const Schedule& s, double factor) {
  Schedule out;
  for (const auto& seg : s) {
    out.push_back({static_cast<int>(std::lround(seg.begin * factor)),
                   static_cast<int>(std::lround(seg.end * factor)), seg.lr});
  }
  // Segments that collapse to nothing are dropped.
  std::erase_if(out, [](const ScheduleSegment& g) { return g.end <= g.begin; });
  return out;
}

Optimizer::Optimizer(std::vector<ParamRef> params, OptimizerConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor->numel(), 0.0);
    v_.emplace_back(cfg_.kind == OptimizerKind::Adam ? p.tensor->numel() : 0, 0.0);
    p.tensor->zero_grad();
  }
}

void Optimizer::step(double lr, double grad_scale) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& t = *params_[k].tensor;
    if (t.grad.size() != t.data.size()) t.zero_grad();
    auto& m = m_[k];
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      const double g = t.grad[i] * grad_scale + cfg_.weight_decay * t.data[i];
      if (cfg_.kind == OptimizerKind::Sgd) {
        m[i] = cfg_.momentum * m[i] + g;
        t.data[i] -= lr * m[i];
      } else {
        auto& v = v_[k];
        m[i] = cfg_.beta1 * m[i] + (1 - cfg_.beta1) * g;
        v[i] = cfg_.beta2 * v[i] + (1 - cfg_.beta2) * g * g;
        t.data[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.eps);
      }
    }
    t.zero_grad();
  }
}

}  // namespace fgaug::numkit
