#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "neuronalg/contour.hpp"
#include "neuronalg/raster.hpp"

namespace nalg {

/// Current-driven leaky integrate-and-fire parameters (ms, pF, mV).
struct NeuronParams {
  double tau_m = 10.0;
  double c_m = 250.0;
  double v_rest = -70.0;
  double v_th = -55.0;
  double v_reset = -70.0;
  double t_ref = 2.0;
};

// Weights are PSC amplitudes large enough that a single presynaptic spike
// brings a resting target over threshold inside one window.
struct SynapseParams {
  double w_exc = 8000.0;    // pA
  double w_inh = -16000.0;  // pA
  double tau_syn = 2.0;   // ms, exponential current decay
  double delay = 1.0;     // ms
};

struct AgentConfig {
  NeuronParams neuron;
  SynapseParams synapse;
  double dt = 0.1;      // ms
  double window = 5.0;  // ms
  double speed_gain = 0.06;
  double offset = 0.2;
  double intensity = 3000.0;
  double s_factor = 3.0 / 8.0;
  double lambda_init = 1.0;
  double lambda_max = 1.5;
  int max_windows = 200;
  int zero_streak = 3;
  double band_width = 0.06;
  int band_windows = 10;
  /// Gaussian sigma of the object mask, in units of sd.
  double mask_sigma_sd = 2.0;
};

// 2D prefix sums over a rectangular region of interest inside a larger
// frame. Window sums use clamp-to-edge semantics relative to the frame;
// frame pixels outside the region contribute `fill`.
class SummedArea {
 public:
  SummedArea() = default;
  SummedArea(const Raster<double>& values, int origin_x, int origin_y, int frame_w, int frame_h,
             double fill);

  /// Sum over the (2r+1)^2 window centred at (cx, cy), frame coordinates.
  double window_sum(int cx, int cy, int r) const;

 private:
  double rect(int x0, int x1, int y0, int y1) const;

  int ox_ = 0, oy_ = 0, w_ = 0, h_ = 0, frame_w_ = 0, frame_h_ = 0;
  double fill_ = 0.0;
  std::vector<double> table_;
};

struct FieldConstants {
  double intensity = 3000.0;
  double s_factor = 3.0 / 8.0;
};

// Read-only stimulation fields for one object. `gray` sums are shared
// between objects of the same image; the mask part is object specific.
struct StimulationFields {
  std::shared_ptr<const SummedArea> gray_sum;
  SummedArea mask_filt_sum;
  double gray_avg = 0.0;
  int sd = 2;
  int width = 0;
  int height = 0;
  FieldConstants k;

  static std::shared_ptr<const SummedArea> gray_table(const GrayImage& gray);

  // Builds the fields on a region of interest; pass the full frame as ROI
  // to evaluate anywhere. `mask_smooth` covers the ROI only.
  static StimulationFields build(std::shared_ptr<const SummedArea> gray_sum, double gray_avg,
                                 const GrayImage& mask_smooth, int roi_x, int roi_y, int frame_w,
                                 int frame_h, int sd, FieldConstants k = {});

  /// Whole-image convenience overload (smooths `object_mask` itself).
  static StimulationFields build(const GrayImage& gray, const BinaryMask& object_mask, int sd,
                                 double mask_sigma, FieldConstants k = {});
};

/// mask_filt = (2 * mask_smooth + 0.1) / 1.1
inline double mask_filt(double mask_smooth) { return (2.0 * mask_smooth + 0.1) / 1.1; }

/// E = intensity * sum(mask_filt over window) / (2 sd^2)
double field_E(const StimulationFields& f, Point p);
/// S = intensity * s_factor * sum(gray over window) / (sd^2 * gray_avg); 0 if gray_avg = 0
double field_S(const StimulationFields& f, Point p);

struct Currents {
  double s_ls = 0.0;
  double s_rs = 0.0;
  double e_le = 0.0;
  double e_re = 0.0;
};

/// p_a(lambda) = lambda * pc + (1 - lambda) * p0
inline Point agent_position(Point p0, Point pc, double lambda) {
  return {lambda * pc.x + (1.0 - lambda) * p0.x, lambda * pc.y + (1.0 - lambda) * p0.y};
}

enum Neuron : int { LS = 0, LE, RE, RS, LI, RI, LM, RM, kNeuronCount };

struct Synapse {
  int pre;
  int post;
  double weight;
};

// Fixed three-layer topology. Sensory LS/RS excite the interneuron on
// their side and the opposite motor; LE/RE excite the same-side motor;
// LI/RI inhibit the same-side motor.
class SpikingNetwork {
 public:
  explicit SpikingNetwork(const AgentConfig& cfg = {});

  const std::vector<Synapse>& synapses() const noexcept { return synapses_; }

  struct Counts {
    int lm = 0;
    int rm = 0;
    std::array<int, kNeuronCount> all{};
  };

  // Integrates one window from rest with the four sensory neurons driven by
  // constant currents. State does not carry over between calls.
  Counts simulate_window(const Currents& c) const;

 private:
  AgentConfig cfg_;
  std::vector<Synapse> synapses_;
};

struct NeuronalAgent {
  double lambda = 1.0;
  Point p0;
  Point pc;
};

Currents stimulate(const NeuronalAgent& a, const StimulationFields& f, const AgentConfig& cfg);

/// speed_gain * (spikes_RM - spikes_LM)
inline double agent_speed(int spikes_lm, int spikes_rm, double gain = 0.06) {
  return gain * (spikes_rm - spikes_lm);
}

enum class AgentStatus { ZeroSpeed, Oscillation, NonConverged };

struct AgentResult {
  double lambda = 1.0;
  AgentStatus status = AgentStatus::NonConverged;
  int windows = 0;
};

AgentResult run_agent(NeuronalAgent agent, const StimulationFields& f, const SpikingNetwork& net,
                      const AgentConfig& cfg);

struct RefineResult {
  RadialContour contour;
  std::array<AgentResult, kRadialBins> agents{};
  bool all_converged() const;
};

// One agent per contour point (initial lambda = cfg.lambda_init); each
// radius is scaled by the agent's final lambda.
RefineResult refine_contour(const RadialContour& c, const StimulationFields& f,
                            const AgentConfig& cfg);
RefineResult refine_contour(const RadialContour& c, const GrayImage& gray, const BinaryMask& mask,
                            const AgentConfig& cfg);

}  // namespace nalg
