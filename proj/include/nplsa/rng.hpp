#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace nplsa {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3", SC'11). Maps a 128-bit counter and a 64-bit key to
/// 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Identifier written into output metadata so other implementations can
/// reproduce the streams.
inline constexpr const char* kRngName = "philox4x32-10";

/// Purpose tags for independent streams derived from one seed.
enum class StreamPurpose : std::uint32_t {
    topic_init = 1,
    synth_topics = 2,
    synth_doc = 3,
    doc_order = 4,
    heldout_split = 5,
};

/// Counter-based generator. A stream is identified by (seed, purpose, index);
/// the n-th 64-bit draw of a stream is a pure function of those plus n, so
/// parallel and serial consumers see identical values.
///
/// Counter layout: words 0-1 hold the block number, word 2 the stream index,
/// word 3 the purpose tag. Each block yields two 64-bit outputs, low word
/// first.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, StreamPurpose purpose, std::uint32_t index = 0);

    std::uint64_t next_u64();

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform();

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller (cosine branch only; one normal per
    /// two uniforms).
    double normal();

    /// log of a Gamma(shape, 1) draw. Marsaglia-Tsang for shape >= 1; for
    /// shape < 1 uses the boost G(a) = G(a + 1) U^(1/a) in log space, so
    /// tiny shapes never underflow.
    double log_gamma_draw(double shape);

    /// Symmetric Dirichlet(concentration) draw of the given dimension.
    std::vector<double> dirichlet(double concentration, std::size_t dim);

    /// Draw an index from cumulative weights (last entry is the total).
    std::size_t categorical_cdf(std::span<const double> cdf);

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_index_;
    std::uint32_t purpose_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;  // 64-bit values left in buffer_
};

/// Fisher-Yates shuffle of [0, n) driven by the doc_order stream.
std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, std::uint32_t index = 0);

}  // namespace nplsa
