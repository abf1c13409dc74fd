#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dbicm/ldpc.hpp"
#include "json.hpp"

namespace dbicm {

std::string to_alist(const TannerCode& code) {
    std::ostringstream os;
    int max_vn = 0;
    int max_cn = 0;
    for (const auto& e : code.vn_edges) max_vn = std::max(max_vn, static_cast<int>(e.size()));
    for (const auto& e : code.cn_edges) max_cn = std::max(max_cn, static_cast<int>(e.size()));
    os << code.n << " " << code.n_checks << "\n";
    os << max_vn << " " << max_cn << "\n";
    for (int v = 0; v < code.n; ++v)
        os << code.vn_edges[v].size() << (v + 1 == code.n ? "\n" : " ");
    for (int c = 0; c < code.n_checks; ++c)
        os << code.cn_edges[c].size() << (c + 1 == code.n_checks ? "\n" : " ");
    for (const auto& e : code.vn_edges) {
        for (int i = 0; i < max_vn; ++i)
            os << (i < static_cast<int>(e.size()) ? e[i] + 1 : 0) << (i + 1 == max_vn ? "\n" : " ");
    }
    for (const auto& e : code.cn_edges) {
        for (int i = 0; i < max_cn; ++i)
            os << (i < static_cast<int>(e.size()) ? e[i] + 1 : 0) << (i + 1 == max_cn ? "\n" : " ");
    }
    return os.str();
}

TannerCode from_alist(const std::string& text) {
    std::istringstream is(text);
    TannerCode code;
    int max_vn = 0, max_cn = 0;
    if (!(is >> code.n >> code.n_checks >> max_vn >> max_cn) || code.n <= 0 ||
        code.n_checks <= 0)
        throw std::runtime_error("from_alist: malformed header");
    std::vector<int> vdeg(code.n), cdeg(code.n_checks);
    for (int v = 0; v < code.n; ++v)
        if (!(is >> vdeg[v])) throw std::runtime_error("from_alist: truncated VN degrees");
    for (int c = 0; c < code.n_checks; ++c)
        if (!(is >> cdeg[c])) throw std::runtime_error("from_alist: truncated CN degrees");
    code.vn_edges.assign(code.n, {});
    code.cn_edges.assign(code.n_checks, {});
    for (int v = 0; v < code.n; ++v) {
        for (int i = 0; i < max_vn; ++i) {
            int c;
            if (!(is >> c)) throw std::runtime_error("from_alist: truncated VN lists");
            if (c == 0) continue;
            if (c < 1 || c > code.n_checks) throw std::runtime_error("from_alist: CN index out of range");
            code.vn_edges[v].push_back(c - 1);
        }
        if (static_cast<int>(code.vn_edges[v].size()) != vdeg[v])
            throw std::runtime_error("from_alist: VN degree mismatch");
    }
    for (int c = 0; c < code.n_checks; ++c) {
        for (int i = 0; i < max_cn; ++i) {
            int v;
            if (!(is >> v)) throw std::runtime_error("from_alist: truncated CN lists");
            if (v == 0) continue;
            if (v < 1 || v > code.n) throw std::runtime_error("from_alist: VN index out of range");
            code.cn_edges[c].push_back(v - 1);
        }
        if (static_cast<int>(code.cn_edges[c].size()) != cdeg[c])
            throw std::runtime_error("from_alist: CN degree mismatch");
    }
    return code;
}

void write_alist_file(const TannerCode& code, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_alist_file: cannot open " + path);
    f << to_alist(code);
    if (!f) throw std::runtime_error("write_alist_file: write failed for " + path);
}

TannerCode read_alist_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_alist_file: cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return from_alist(buf.str());
}

std::string assignment_to_json(const ChannelAssignment& ca, std::uint64_t seed) {
    nlohmann::json j;
    j["m"] = ca.m;
    j["phi"] = ca.type_of_bit;
    j["degrees"] = ca.degrees;
    j["p"] = ca.p;
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

ChannelAssignment assignment_from_json(const std::string& text, std::uint64_t* seed) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ChannelAssignment ca;
    ca.m = j.at("m").get<int>();
    ca.type_of_bit = j.at("phi").get<std::vector<int>>();
    ca.degrees = j.at("degrees").get<std::vector<int>>();
    ca.p = j.at("p").get<std::vector<std::vector<double>>>();
    if (seed) *seed = j.value("seed", std::uint64_t{0});
    return ca;
}

}  // namespace dbicm
