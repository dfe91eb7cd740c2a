#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace genprior {

/// Fixed-length bit vector indexed by sample; bit i set means "holds in sample i".
class SampleMask
{
public:
    SampleMask() = default;
    explicit SampleMask(std::size_t n, bool value = false);

    static SampleMask ones(std::size_t n) { return SampleMask(n, true); }

    std::size_t size() const noexcept { return size_; }
    std::size_t count() const noexcept;
    bool empty_set() const noexcept;
    bool full() const noexcept { return count() == size_; }

    bool test(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) noexcept { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    void reset(std::size_t i) noexcept { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    SampleMask& operator&=(const SampleMask& o) noexcept;
    SampleMask& operator|=(const SampleMask& o) noexcept;
    SampleMask operator~() const;
    friend SampleMask operator&(SampleMask a, const SampleMask& b) noexcept { return a &= b; }
    friend SampleMask operator|(SampleMask a, const SampleMask& b) noexcept { return a |= b; }
    bool operator==(const SampleMask&) const = default;

    bool is_subset_of(const SampleMask& o) const noexcept;
    /// popcount(*this & o) without materializing the intersection.
    std::size_t count_and(const SampleMask& o) const noexcept;

    /// Hex digits, most significant first; bit 0 is the lowest bit of the last digit.
    std::string to_hex() const;
    static SampleMask from_hex(std::string_view hex, std::size_t n);

    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

private:
    void clear_tail() noexcept;

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace genprior
