#include "genprior/sample_mask.hpp"

#include "genprior/error.hpp"

namespace genprior {

SampleMask::SampleMask(std::size_t n, bool value)
    : size_(n), words_((n + 63) / 64, value ? ~std::uint64_t{0} : 0)
{
    clear_tail();
}

void SampleMask::clear_tail() noexcept
{
    if (const std::size_t rem = size_ & 63; rem != 0 && !words_.empty())
        words_.back() &= (std::uint64_t{1} << rem) - 1;
}

std::size_t SampleMask::count() const noexcept
{
    std::size_t c = 0;
    for (const auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

bool SampleMask::empty_set() const noexcept
{
    for (const auto w : words_)
        if (w) return false;
    return true;
}

SampleMask& SampleMask::operator&=(const SampleMask& o) noexcept
{
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
}

SampleMask& SampleMask::operator|=(const SampleMask& o) noexcept
{
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
}

SampleMask SampleMask::operator~() const
{
    SampleMask out = *this;
    for (auto& w : out.words_) w = ~w;
    out.clear_tail();
    return out;
}

bool SampleMask::is_subset_of(const SampleMask& o) const noexcept
{
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] & ~o.words_[i]) return false;
    return true;
}

std::size_t SampleMask::count_and(const SampleMask& o) const noexcept
{
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
        c += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
    return c;
}

std::string SampleMask::to_hex() const
{
    static constexpr char kDigits[] = "0123456789abcdef";
    const std::size_t digits = size_ == 0 ? 1 : (size_ + 3) / 4;
    std::string out(digits, '0');
    for (std::size_t d = 0; d < digits && size_ > 0; ++d) {
        const std::size_t bit = 4 * d;
        const unsigned nibble = static_cast<unsigned>((words_[bit >> 6] >> (bit & 63)) & 0xF);
        out[digits - 1 - d] = kDigits[nibble];
    }
    return out;
}

SampleMask SampleMask::from_hex(std::string_view hex, std::size_t n)
{
    SampleMask m(n);
    const std::size_t digits = hex.size();
    for (std::size_t d = 0; d < digits; ++d) {
        const char c = hex[digits - 1 - d];
        unsigned v = 0;
        if (c >= '0' && c <= '9') v = static_cast<unsigned>(c - '0');
        else if (c >= 'a' && c <= 'f') v = static_cast<unsigned>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') v = static_cast<unsigned>(c - 'A' + 10);
        else fail("mask: invalid hex digit");
        for (unsigned b = 0; b < 4; ++b) {
            if (!((v >> b) & 1u)) continue;
            const std::size_t bit = 4 * d + b;
            if (bit >= n) fail("mask: hex value exceeds mask length");
            m.set(bit);
        }
    }
    return m;
}

}  // namespace genprior
