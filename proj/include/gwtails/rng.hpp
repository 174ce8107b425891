#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gwtails {

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based block cipher.
 *
 * Maps a 128-bit counter and a 64-bit key to 128 pseudorandom bits. Any
 * (key, counter) pair can be evaluated independently, which is what makes
 * per-replica streams reproducible regardless of scheduling.
 */
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key);
};

//! Identifies a stream: the experiment seed plus a (lane, replica) pair.
struct StreamId {
    std::uint64_t seed = 0;
    std::uint32_t lane = 0;      // < 2^24: separates independent stages
    std::uint64_t replica = 0;   // < 2^40

    friend bool operator==(const StreamId&, const StreamId&) = default;
};

//---------------------------------------------------------------------------//
/*!
 * A reproducible random stream backed by Philox.
 *
 * Satisfies UniformRandomBitGenerator with 64-bit output. The counter layout is
 * (block index: 64 bits, replica: 40 bits, lane: 24 bits) under key = seed.
 */
class RandomStream {
  public:
    using result_type = std::uint64_t;

    explicit RandomStream(StreamId id);
    RandomStream(std::uint64_t seed, std::uint32_t lane, std::uint64_t replica)
        : RandomStream(StreamId{seed, lane, replica})
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (pos_ == 2) refill();
        return buffer_[pos_++];
    }

    //! Uniform on (0, 1] with 53-bit resolution.
    double uniform_open_closed()
    {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    const StreamId& id() const { return id_; }
    std::uint64_t blocks_consumed() const { return block_; }

  private:
    void refill();

    StreamId id_;
    Philox4x32::Key key_{};
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int pos_ = 2;
};

}  // namespace gwtails
