#pragma once

#include <array>
#include <cstdint>

#include "mdpsim/error.hpp"

namespace mdpsim {

/// Global branch history register, newest outcome in bit 0.
class BranchHistory
{
  public:
    static constexpr unsigned kMaxBits = 1024;

    void push(bool taken)
    {
        for (std::size_t w = kWords; w-- > 1;)
            words_[w] = (words_[w] << 1) | (words_[w - 1] >> 63);
        words_[0] = (words_[0] << 1) | (taken ? 1u : 0u);
    }

    bool bit(unsigned i) const { return (words_[i / 64] >> (i % 64)) & 1; }

    /// XOR-folds the newest `length` outcomes into `width` bits.
    std::uint64_t fold(unsigned length, unsigned width) const
    {
        if (length > kMaxBits)
            throw ArgumentError("BranchHistory::fold: length exceeds register");
        if (width == 0)
            return 0;
        std::uint64_t acc = 0;
        for (unsigned off = 0; off < length; off += width) {
            unsigned n = length - off < width ? length - off : width;
            acc ^= bits(off, n);
        }
        return acc;
    }

    bool operator==(const BranchHistory&) const = default;

  private:
    static constexpr std::size_t kWords = kMaxBits / 64;

    /// n <= 64 bits starting at bit `off`.
    std::uint64_t bits(unsigned off, unsigned n) const
    {
        const unsigned w = off / 64, s = off % 64;
        std::uint64_t v = words_[w] >> s;
        if (s != 0 && w + 1 < kWords)
            v |= words_[w + 1] << (64 - s);
        return n >= 64 ? v : v & ((std::uint64_t(1) << n) - 1);
    }

    std::array<std::uint64_t, kWords> words_{};
};

} // namespace mdpsim
