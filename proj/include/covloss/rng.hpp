#pragma once

#include <array>
#include <cstdint>

namespace covloss {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A block is a pure function of (key, counter), so any substream can be
/// regenerated from its coordinates without replaying other streams.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Identifies an independent family of substreams (one per simulation kind).
enum class StreamDomain : std::uint32_t {
  ccp_factors = 1,
  cdo_factors = 2,
  test = 3,
  subsample = 4,
};

/// Coordinates of a reproducible substream: (seed, domain, stream id, path).
struct SubstreamId {
  std::uint64_t seed = 0;
  StreamDomain domain = StreamDomain::test;
  std::uint32_t stream = 0;  // batch index
  std::uint32_t path = 0;    // path index within the stream
};

/// Sequential draws from one Philox substream.
class PathRng {
 public:
  explicit PathRng(const SubstreamId& id);

  /// Uniform on the open interval (0,1).
  double uniform();
  /// Standard normal (Box-Muller, both outputs used).
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);
  /// Chi-squared with nu degrees of freedom (nu > 0, not necessarily integer).
  double chi_squared(double nu) { return 2.0 * gamma(0.5 * nu); }

 private:
  std::uint64_t next_u64();

  Philox4x32::Key key_{};
  Philox4x32::Counter ctr_{};
  Philox4x32::Counter buf_{};
  int buf_pos_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace covloss
