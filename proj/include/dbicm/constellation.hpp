#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dbicm {

enum class ModKind { Pam, Qam };

/// Uniform Gray labeled signal set with unit average symbol energy.
///
/// Points are stored in label order: points()[v] is the symbol whose m-bit
/// label has integer value v with bit 0 as the MOST significant bit. For QAM
/// the first m/2 bits select the real coordinate and the last m/2 bits the
/// imaginary coordinate, each through an identical binary-reflected Gray PAM.
class Constellation {
  public:
    /// Gray labeled PAM with `levels` points at odd integers, scaled to unit
    /// average energy in closed form.
    static Constellation gray_pam(int levels);

    /// Square Gray QAM as the product of two identical Gray sqrt(order)-PAMs.
    static Constellation gray_qam(int order);

    int order() const { return static_cast<int>(points_.size()); }
    int bits() const { return bits_; }
    ModKind kind() const { return kind_; }

    const std::vector<std::complex<double>>& points() const { return points_; }
    std::complex<double> point(std::uint32_t label) const { return points_[label]; }

    /// Value of bit `pos` (0 = MSB) in `label`.
    int label_bit(std::uint32_t label, int pos) const {
        return static_cast<int>((label >> (bits_ - 1 - pos)) & 1u);
    }

    /// Labels of all points whose label matches every (position, value)
    /// constraint. Throws on duplicate or out-of-range positions.
    std::vector<std::uint32_t> subset(std::span<const std::pair<int, int>> known) const;

    /// Bitmask with a 1 at the stored-bit position of label bit `pos`.
    std::uint32_t bit_mask(int pos) const { return 1u << (bits_ - 1 - pos); }

    /// Splits a QAM into its two identical unit-energy Gray PAM factors;
    /// gray_qam applied to the factor order reproduces this constellation.
    std::pair<Constellation, Constellation> real_imag_split() const;

    /// CSV dump: index, label bits, re, im.
    std::string to_csv() const;

  private:
    Constellation() = default;
    std::vector<std::complex<double>> points_;
    int bits_ = 0;
    ModKind kind_ = ModKind::Pam;
};

/// Per-bit-position sub-block delays. The paper's convention T_min = 0 is
/// enforced at construction.
struct DelayScheme {
    std::vector<int> delays;

    DelayScheme() = default;
    explicit DelayScheme(std::vector<int> t);

    static DelayScheme all_zero(int m) { return DelayScheme(std::vector<int>(m, 0)); }
    /// Parses a comma-separated list, e.g. "0,1,0,1".
    static DelayScheme parse(const std::string& text);

    int size() const { return static_cast<int>(delays.size()); }
    int t_max() const;
    /// Positions with nonzero delay (the set D).
    std::vector<int> delayed() const;
    /// Positions with zero delay (the set D-tilde).
    std::vector<int> undelayed() const;
    bool is_all_zero() const;
    std::string to_string() const;

    bool operator==(const DelayScheme& o) const { return delays == o.delays; }
};

}  // namespace dbicm
