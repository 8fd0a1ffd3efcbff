#include "neuronalg/agent.hpp"

#include <algorithm>
#include <cmath>

#include "neuronalg/imagecore.hpp"

namespace nalg {

SummedArea::SummedArea(const Raster<double>& values, int origin_x, int origin_y, int frame_w,
                       int frame_h, double fill)
    : ox_(origin_x),
      oy_(origin_y),
      w_(values.width()),
      h_(values.height()),
      frame_w_(frame_w),
      frame_h_(frame_h),
      fill_(fill),
      table_(static_cast<std::size_t>(values.width() + 1) * (values.height() + 1), 0.0) {
  const std::size_t stride = static_cast<std::size_t>(w_) + 1;
  for (int y = 0; y < h_; ++y) {
    double row = 0.0;
    for (int x = 0; x < w_; ++x) {
      row += values(x, y);
      table_[(y + 1) * stride + (x + 1)] = table_[y * stride + (x + 1)] + row;
    }
  }
}

double SummedArea::rect(int x0, int x1, int y0, int y1) const {
  const double total = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
  const int ix0 = std::max(x0, ox_) - ox_;
  const int ix1 = std::min(x1, ox_ + w_ - 1) - ox_;
  const int iy0 = std::max(y0, oy_) - oy_;
  const int iy1 = std::min(y1, oy_ + h_ - 1) - oy_;
  if (ix0 > ix1 || iy0 > iy1) return fill_ * total;
  const std::size_t stride = static_cast<std::size_t>(w_) + 1;
  const double inside = table_[(iy1 + 1) * stride + (ix1 + 1)] - table_[iy0 * stride + (ix1 + 1)] -
                        table_[(iy1 + 1) * stride + ix0] + table_[iy0 * stride + ix0];
  const double inside_area = static_cast<double>(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
  return inside + fill_ * (total - inside_area);
}

double SummedArea::window_sum(int cx, int cy, int r) const {
  cx = std::clamp(cx, 0, frame_w_ - 1);
  cy = std::clamp(cy, 0, frame_h_ - 1);
  struct Span {
    int a, b;
    double mult;
  };
  auto spans = [r](int c, int n) {
    std::array<Span, 3> s{};
    int count = 0;
    const int lo = c - r;
    const int hi = c + r;
    if (lo < 0) s[count++] = {0, 0, static_cast<double>(-lo)};
    s[count++] = {std::max(lo, 0), std::min(hi, n - 1), 1.0};
    if (hi > n - 1) s[count++] = {n - 1, n - 1, static_cast<double>(hi - (n - 1))};
    return std::pair{s, count};
  };
  const auto [xs, nx] = spans(cx, frame_w_);
  const auto [ys, ny] = spans(cy, frame_h_);
  double sum = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      sum += xs[i].mult * ys[j].mult * rect(xs[i].a, xs[i].b, ys[j].a, ys[j].b);
    }
  }
  return sum;
}

std::shared_ptr<const SummedArea> StimulationFields::gray_table(const GrayImage& gray) {
  return std::make_shared<const SummedArea>(gray, 0, 0, gray.width(), gray.height(), 0.0);
}

StimulationFields StimulationFields::build(std::shared_ptr<const SummedArea> gray_sum,
                                           double gray_avg, const GrayImage& mask_smooth,
                                           int roi_x, int roi_y, int frame_w, int frame_h, int sd,
                                           FieldConstants k) {
  Raster<double> filt(mask_smooth.width(), mask_smooth.height());
  for (std::size_t i = 0; i < filt.size(); ++i) filt[i] = mask_filt(mask_smooth[i]);
  StimulationFields f;
  f.gray_sum = std::move(gray_sum);
  f.mask_filt_sum = SummedArea(filt, roi_x, roi_y, frame_w, frame_h, mask_filt(0.0));
  f.gray_avg = gray_avg;
  f.sd = sd;
  f.width = frame_w;
  f.height = frame_h;
  f.k = k;
  return f;
}

StimulationFields StimulationFields::build(const GrayImage& gray, const BinaryMask& object_mask,
                                           int sd, double mask_sigma, FieldConstants k) {
  require_same_shape(gray, object_mask, "StimulationFields");
  GrayImage m(object_mask.width(), object_mask.height());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = object_mask[i] ? 1.0 : 0.0;
  double total = 0.0;
  for (double v : gray.storage()) total += v;
  return build(gray_table(gray), total / static_cast<double>(gray.size()),
               gaussian_smooth(m, mask_sigma), 0, 0, gray.width(), gray.height(), sd, k);
}

namespace {

std::pair<int, int> pixel_of(const StimulationFields& f, Point p) {
  const int x = std::clamp(static_cast<int>(std::lround(p.x)), 0, f.width - 1);
  const int y = std::clamp(static_cast<int>(std::lround(p.y)), 0, f.height - 1);
  return {x, y};
}

}  // namespace

double field_E(const StimulationFields& f, Point p) {
  const auto [x, y] = pixel_of(f, p);
  const double sd = f.sd;
  return f.k.intensity * f.mask_filt_sum.window_sum(x, y, f.sd) / (2.0 * sd * sd);
}

double field_S(const StimulationFields& f, Point p) {
  if (!(f.gray_avg > 0.0)) return 0.0;
  const auto [x, y] = pixel_of(f, p);
  const double sd = f.sd;
  return f.k.intensity * f.k.s_factor * f.gray_sum->window_sum(x, y, f.sd) /
         (sd * sd * f.gray_avg);
}

SpikingNetwork::SpikingNetwork(const AgentConfig& cfg) : cfg_(cfg) {
  const double we = cfg.synapse.w_exc;
  const double wi = cfg.synapse.w_inh;
  synapses_ = {
      {LS, LI, we}, {RS, RI, we},  //
      {LS, RM, we}, {RS, LM, we},  //
      {LE, LM, we}, {RE, RM, we},  //
      {LI, LM, wi}, {RI, RM, wi},
  };
}

SpikingNetwork::Counts SpikingNetwork::simulate_window(const Currents& c) const {
  const NeuronParams& np = cfg_.neuron;
  const double dt = cfg_.dt;
  const int steps = static_cast<int>(std::lround(cfg_.window / dt));
  const int delay_steps = std::max(1, static_cast<int>(std::lround(cfg_.synapse.delay / dt)));
  const int ref_steps = static_cast<int>(std::lround(np.t_ref / dt));
  const double leak = std::exp(-dt / np.tau_m);
  const double gain = (np.tau_m / np.c_m) * (1.0 - leak);
  const double syn_decay = std::exp(-dt / cfg_.synapse.tau_syn);

  std::array<double, kNeuronCount> ext{};
  ext[LS] = c.s_ls;
  ext[RS] = c.s_rs;
  ext[LE] = c.e_le;
  ext[RE] = c.e_re;

  std::array<double, kNeuronCount> v;
  v.fill(np.v_rest);
  std::array<double, kNeuronCount> i_exc{};
  std::array<double, kNeuronCount> i_inh{};
  std::array<int, kNeuronCount> refractory{};
  // Pending synaptic input, indexed by arrival step.
  const std::size_t horizon = static_cast<std::size_t>(steps + delay_steps + 1);
  std::vector<std::array<double, kNeuronCount>> arrive_exc(horizon);
  std::vector<std::array<double, kNeuronCount>> arrive_inh(horizon);

  Counts out;
  for (int s = 0; s < steps; ++s) {
    for (int n = 0; n < kNeuronCount; ++n) {
      i_exc[n] += arrive_exc[static_cast<std::size_t>(s)][n];
      i_inh[n] += arrive_inh[static_cast<std::size_t>(s)][n];
    }
    std::array<bool, kNeuronCount> fired{};
    for (int n = 0; n < kNeuronCount; ++n) {
      if (refractory[n] > 0) {
        --refractory[n];
        v[n] = np.v_reset;
        continue;
      }
      const double current = ext[n] + (i_exc[n] + i_inh[n]);
      v[n] = np.v_rest + (v[n] - np.v_rest) * leak + current * gain;
      if (v[n] >= np.v_th) {
        fired[n] = true;
        v[n] = np.v_reset;
        refractory[n] = ref_steps;
        ++out.all[n];
      }
    }
    for (const Synapse& syn : synapses_) {
      if (!fired[syn.pre]) continue;
      const auto at = static_cast<std::size_t>(s + delay_steps);
      if (syn.weight >= 0.0) {
        arrive_exc[at][syn.post] += syn.weight;
      } else {
        arrive_inh[at][syn.post] += syn.weight;
      }
    }
    for (int n = 0; n < kNeuronCount; ++n) {
      i_exc[n] *= syn_decay;
      i_inh[n] *= syn_decay;
    }
  }
  out.lm = out.all[LM];
  out.rm = out.all[RM];
  return out;
}

Currents stimulate(const NeuronalAgent& a, const StimulationFields& f, const AgentConfig& cfg) {
  const double l_left = std::clamp(a.lambda - cfg.offset, 0.0, cfg.lambda_max);
  const double l_right = std::clamp(a.lambda + cfg.offset, 0.0, cfg.lambda_max);
  const Point left = agent_position(a.p0, a.pc, l_left);
  const Point right = agent_position(a.p0, a.pc, l_right);
  return {field_S(f, left), field_S(f, right), field_E(f, left), field_E(f, right)};
}

AgentResult run_agent(NeuronalAgent agent, const StimulationFields& f, const SpikingNetwork& net,
                      const AgentConfig& cfg) {
  AgentResult r;
  int streak = 0;
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.max_windows));
  for (int w = 0; w < cfg.max_windows; ++w) {
    const auto counts = net.simulate_window(stimulate(agent, f, cfg));
    const double speed = agent_speed(counts.lm, counts.rm, cfg.speed_gain);
    r.windows = w + 1;
    if (speed == 0.0) {
      if (++streak >= cfg.zero_streak) {
        r.lambda = agent.lambda;
        r.status = AgentStatus::ZeroSpeed;
        return r;
      }
    } else {
      streak = 0;
    }
    agent.lambda = std::clamp(agent.lambda + speed, 0.0, cfg.lambda_max);
    history.push_back(agent.lambda);
    if (static_cast<int>(history.size()) >= cfg.band_windows) {
      const auto first = history.end() - cfg.band_windows;
      const auto [lo, hi] = std::minmax_element(first, history.end());
      if (*hi - *lo <= cfg.band_width + 1e-12) {
        r.lambda = 0.5 * (*lo + *hi);
        r.status = AgentStatus::Oscillation;
        return r;
      }
    }
  }
  r.lambda = agent.lambda;
  r.status = AgentStatus::NonConverged;
  return r;
}

bool RefineResult::all_converged() const {
  return std::none_of(agents.begin(), agents.end(),
                      [](const AgentResult& a) { return a.status == AgentStatus::NonConverged; });
}

RefineResult refine_contour(const RadialContour& c, const StimulationFields& f,
                            const AgentConfig& cfg) {
  const SpikingNetwork net(cfg);
  RefineResult out;
  out.contour = c;
  for (int b = 0; b < kRadialBins; ++b) {
    NeuronalAgent agent{cfg.lambda_init, c.center, c.point(b)};
    out.agents[static_cast<std::size_t>(b)] = run_agent(agent, f, net, cfg);
    out.contour.radii[static_cast<std::size_t>(b)] *= out.agents[static_cast<std::size_t>(b)].lambda;
  }
  return out;
}

RefineResult refine_contour(const RadialContour& c, const GrayImage& gray, const BinaryMask& mask,
                            const AgentConfig& cfg) {
  require_same_shape(gray, mask, "refine_contour");
  const ScaleFactor scale = ScaleFactor::for_size(gray.width(), gray.height());
  const StimulationFields f =
      StimulationFields::build(gray, mask, scale.sd, cfg.mask_sigma_sd * scale.sd,
                               FieldConstants{cfg.intensity, cfg.s_factor});
  return refine_contour(c, f, cfg);
}

}  // namespace nalg
