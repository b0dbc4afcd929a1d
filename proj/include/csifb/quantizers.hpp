#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "csifb/channel_model.hpp"
#include "csifb/errors.hpp"

namespace csifb {

// ---------------------------------------------------------------------------
// Random vector quantization of channel directions
// ---------------------------------------------------------------------------

inline constexpr int kDefaultRvqBitCap = 22;

/// 2^B isotropic unit vectors stored as the columns of an M x 2^B matrix.
struct RvqCodebook {
  int antennas = 0;
  int bits = 0;
  CMat codewords;

  std::size_t size() const { return static_cast<std::size_t>(codewords.cols()); }
};

/// Throws ResourceError when bits > bit_cap.
RvqCodebook rvq_build(int antennas, int bits, RandomStream& rng, int bit_cap = kDefaultRvqBitCap);

struct RvqChoice {
  std::size_t index = 0;
  CVec direction;
  double sin2 = 0.0;  // 1 - |h^H c|^2 / |h|^2
};

/// Codeword maximizing |h^H c|^2 / |h|^2; ties resolve to the lowest index.
RvqChoice rvq_quantize(const CVec& h, const RvqCodebook& cb);

/// Quantizes every column of `channels` (M x count) at once.
std::vector<std::size_t> rvq_quantize_columns(const CMat& channels, const RvqCodebook& cb);

// ---------------------------------------------------------------------------
// Bit allocation
// ---------------------------------------------------------------------------

/// Per-coefficient allocation. `bits` are real-valued at the rate-distortion
/// limit and integers for scalar uniform quantization. total_distortion is the
/// weighted sum of `distortions`.
struct BitAllocation {
  std::vector<double> variances;
  std::vector<double> weights;
  std::vector<double> bits;
  std::vector<double> distortions;
  std::vector<double> steps;   // SUQ only; 0 where a coefficient gets no bits
  std::vector<int> levels;     // SUQ only; Q_l per real dimension
  double waterlevel = 0.0;     // RWF only
  double total_bits = 0.0;
  double total_distortion = 0.0;

  std::size_t size() const { return variances.size(); }
};

/// Reverse waterfilling for a target distortion D in (0, sum variances].
BitAllocation rwf_by_distortion(std::span<const double> variances, double distortion);

/// Reverse waterfilling for a target rate in bits.
BitAllocation rwf_by_rate(std::span<const double> variances, double rate_bits);

/// Reverse waterfilling minimizing sum_l w_l D_l for a given rate, via the
/// effective variances w_l * sigma_l^2.
BitAllocation weighted_rwf_by_rate(std::span<const double> variances, std::span<const double> weights,
                                   double rate_bits);

// ---------------------------------------------------------------------------
// Scalar uniform quantization
// ---------------------------------------------------------------------------

/// Largest bit count accepted by the scalar quantizer design.
inline constexpr int kMaxSuqBits = 32;

enum class StepRule { LineSearch, Asymptotic };

struct SuqDesign {
  int bits = 0;
  int levels = 1;            // Q per real dimension
  double step = 0.0;         // Delta; 0 when bits == 0
  double distortion = 0.0;   // complex mean-square error (real + imaginary)
};

/// Mean-square error of one real dimension (variance real_variance) under the
/// midpoint quantizer with `levels` levels and step `step`.
double suq_real_distortion(int levels, double step, double real_variance);

/// Step size and distortion for a CN(0, sigma2) coefficient with `bits` bits
/// split evenly over real and imaginary parts. bits == 1 is rejected.
SuqDesign design_suq(double sigma2, int bits, StepRule rule = StepRule::LineSearch);

double suq_quantize_real(double x, double step, int levels);
cd suq_quantize(cd value, double step, int levels);

/// Complex distortion of a unit-variance coefficient at `bits`, line-searched
/// once and cached.
double unit_suq_distortion(int bits);

/// Fills steps, levels and distortions for integer bits.
BitAllocation suq_allocation(std::span<const double> variances, std::span<const double> weights,
                             std::span<const int> bits);

/// Grants `step` bits at a time to the coefficient whose weighted SUQ
/// distortion drops the most.
BitAllocation greedy_bit_alloc(std::span<const double> variances, std::span<const double> weights,
                               int total_bits, int step = 2);

/// Integer SUQ allocation following the (weighted) reverse waterfilling split:
/// RWF bits are floored to multiples of `step` and the leftover granted to the
/// largest remainders.
BitAllocation rwf_suq_alloc(std::span<const double> variances, std::span<const double> weights, int total_bits,
                            int step = 2);

/// Diagnostic table: index, variance, weight, bits, step, distortion.
std::string format_allocation_table(const BitAllocation& alloc);

// ---------------------------------------------------------------------------
// Transform-domain channel quantization
// ---------------------------------------------------------------------------

struct KlBasis {
  CMat basis;       // N x P, orthonormal columns
  RVec eigenvalues; // descending
};

/// Eigenvectors of Sigma_H with non-negligible eigenvalues.
KlBasis kl_transform(const ChannelStats& stats);

enum class QuantDomain { TimeTaps, KlCoeffs, PhysPaths };

/// Maps channel realizations to quantizer coefficients and back for one
/// domain. Coefficient weights convert coefficient distortion into mean
/// per-subcarrier distortion: 1 for taps, 1/N for K-L coefficients and the
/// diagonal of Psi^H Psi for path gains.
class TransformCodec {
 public:
  TransformCodec(const ChannelStats& stats, QuantDomain domain);

  QuantDomain domain() const { return domain_; }
  int n_coefficients() const { return static_cast<int>(variances_.size()); }
  const RVec& variances() const { return variances_; }
  const RVec& weights() const { return weights_; }

  /// M x coefficient matrix of user k.
  CMat analyze(const ChannelRealization& real, int user) const;
  /// M x N frequency response from an M x coefficient matrix.
  CMat synthesize(const CMat& coefficients) const;

  /// Scalar uniform quantization of every coefficient.
  std::vector<CMat> quantize(const ChannelRealization& real, const BitAllocation& alloc) const;

  /// Reconstruction through the Gaussian backward test channel that attains
  /// the per-coefficient distortions of `alloc` (rate-distortion limit).
  std::vector<CMat> rd_limit(const ChannelRealization& real, const BitAllocation& alloc, const TrialSeed& seed) const;

 private:
  void check(const BitAllocation& alloc) const;

  QuantDomain domain_;
  RVec variances_;
  RVec weights_;
  CMat analysis_;  // K-L only: N x P, conj(U)
  CMat synth_;     // coefficients x N
};

std::vector<CMat> quantize_channel_tdq(const ChannelStats& stats, const ChannelRealization& real,
                                       const BitAllocation& alloc, QuantDomain domain);

}  // namespace csifb
