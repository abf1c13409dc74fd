#include "dbicm/constellation.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dbicm {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2i(int v) {
    int b = 0;
    while ((1 << b) < v) ++b;
    return b;
}

}  // namespace

Constellation Constellation::gray_pam(int levels) {
    if (!is_power_of_two(levels) || levels < 2)
        throw std::invalid_argument("gray_pam: levels must be a power of two >= 2");
    Constellation c;
    c.bits_ = log2i(levels);
    c.kind_ = ModKind::Pam;
    c.points_.assign(levels, {});
    // Amplitudes -(L-1), ..., -1, +1, ..., +(L-1); mean square (L^2-1)/3.
    const double scale = std::sqrt(3.0 / (static_cast<double>(levels) * levels - 1.0));
    for (int p = 0; p < levels; ++p) {
        const std::uint32_t label = static_cast<std::uint32_t>(p ^ (p >> 1));
        const double amp = (2.0 * p - (levels - 1)) * scale;
        c.points_[label] = {amp, 0.0};
    }
    return c;
}

Constellation Constellation::gray_qam(int order) {
    if (order < 4 || !is_power_of_two(order) || (log2i(order) % 2) != 0)
        throw std::invalid_argument("gray_qam: order must be a power of 4 >= 4");
    const int side = 1 << (log2i(order) / 2);
    const Constellation pam = gray_pam(side);
    Constellation c;
    c.bits_ = 2 * pam.bits_;
    c.kind_ = ModKind::Qam;
    c.points_.assign(order, {});
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int a = 0; a < side; ++a) {
        for (int b = 0; b < side; ++b) {
            const std::uint32_t label =
                (static_cast<std::uint32_t>(a) << pam.bits_) | static_cast<std::uint32_t>(b);
            c.points_[label] = {pam.points_[a].real() * inv_sqrt2,
                                pam.points_[b].real() * inv_sqrt2};
        }
    }
    return c;
}

std::vector<std::uint32_t> Constellation::subset(
    std::span<const std::pair<int, int>> known) const {
    std::uint32_t mask = 0;
    std::uint32_t want = 0;
    for (const auto& [pos, val] : known) {
        if (pos < 0 || pos >= bits_) throw std::invalid_argument("subset: bit position out of range");
        const std::uint32_t bit = bit_mask(pos);
        if (mask & bit) throw std::invalid_argument("subset: duplicate bit position");
        mask |= bit;
        if (val) want |= bit;
    }
    std::vector<std::uint32_t> out;
    out.reserve(points_.size() >> known.size());
    for (std::uint32_t label = 0; label < points_.size(); ++label)
        if ((label & mask) == want) out.push_back(label);
    return out;
}

std::pair<Constellation, Constellation> Constellation::real_imag_split() const {
    if (kind_ != ModKind::Qam)
        throw std::invalid_argument("real_imag_split: QAM input required");
    const int side = 1 << (bits_ / 2);
    return {gray_pam(side), gray_pam(side)};
}

std::string Constellation::to_csv() const {
    std::ostringstream os;
    os << "index,label,re,im\n";
    for (std::uint32_t label = 0; label < points_.size(); ++label) {
        os << label << ",";
        for (int i = 0; i < bits_; ++i) os << label_bit(label, i);
        os.precision(17);
        os << "," << points_[label].real() << "," << points_[label].imag() << "\n";
    }
    return os.str();
}

DelayScheme::DelayScheme(std::vector<int> t) : delays(std::move(t)) {
    if (delays.empty()) throw std::invalid_argument("DelayScheme: empty");
    int mn = delays[0];
    for (int d : delays) {
        if (d < 0) throw std::invalid_argument("DelayScheme: negative delay");
        mn = std::min(mn, d);
    }
    if (mn != 0) throw std::invalid_argument("DelayScheme: min delay must be 0");
}

DelayScheme DelayScheme::parse(const std::string& text) {
    std::vector<int> t;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("DelayScheme: cannot parse '" + tok + "'");
        }
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size())
            throw std::invalid_argument("DelayScheme: cannot parse '" + tok + "'");
        t.push_back(v);
    }
    return DelayScheme(std::move(t));
}

int DelayScheme::t_max() const {
    int mx = 0;
    for (int d : delays) mx = std::max(mx, d);
    return mx;
}

std::vector<int> DelayScheme::delayed() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (delays[i] != 0) out.push_back(i);
    return out;
}

std::vector<int> DelayScheme::undelayed() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (delays[i] == 0) out.push_back(i);
    return out;
}

bool DelayScheme::is_all_zero() const {
    for (int d : delays)
        if (d != 0) return false;
    return true;
}

std::string DelayScheme::to_string() const {
    std::string s;
    for (int i = 0; i < size(); ++i) {
        if (i) s += ",";
        s += std::to_string(delays[i]);
    }
    return s;
}

}  // namespace dbicm
