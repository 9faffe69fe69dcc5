#include "pwabf/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace pwabf::io {

namespace {

// Compact SHA-256 (FIPS 180-4), enough for content hashing.
class Sha256 {
public:
    Sha256() { reset(); }

    void update(const unsigned char* data, std::size_t len) {
        while (len > 0) {
            std::size_t take = std::min<std::size_t>(64 - buf_len_, len);
            std::copy(data, data + take, buf_.begin() + buf_len_);
            buf_len_ += take;
            data += take;
            len -= take;
            total_ += take;
            if (buf_len_ == 64) {
                process(buf_.data());
                buf_len_ = 0;
            }
        }
    }

    std::array<unsigned char, 32> digest() {
        std::uint64_t bits = total_ * 8;
        unsigned char pad = 0x80;
        update(&pad, 1);
        unsigned char zero = 0;
        while (buf_len_ != 56) update(&zero, 1);
        unsigned char len_be[8];
        for (int i = 0; i < 8; ++i) len_be[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
        update(len_be, 8);
        std::array<unsigned char, 32> out;
        for (int i = 0; i < 8; ++i) {
            out[4 * i] = static_cast<unsigned char>(h_[i] >> 24);
            out[4 * i + 1] = static_cast<unsigned char>(h_[i] >> 16);
            out[4 * i + 2] = static_cast<unsigned char>(h_[i] >> 8);
            out[4 * i + 3] = static_cast<unsigned char>(h_[i]);
        }
        return out;
    }

private:
    void reset() {
        h_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
              0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
        buf_len_ = 0;
        total_ = 0;
    }

    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void process(const unsigned char* p) {
        static constexpr std::uint32_t K[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
            0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
            0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
            0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
            0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
            0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
            0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
            0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
            0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
            0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
                   (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        auto [a, b, c, d, e, f, g, h] =
            std::tuple{h_[0], h_[1], h_[2], h_[3], h_[4], h_[5], h_[6], h_[7]};
        for (int i = 0; i < 64; ++i) {
            std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t temp1 = h + S1 + ch + K[i] + w[i];
            std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t temp2 = S0 + maj;
            h = g; g = f; f = e; e = d + temp1;
            d = c; c = b; b = a; a = temp1 + temp2;
        }
        h_[0] += a; h_[1] += b; h_[2] += c; h_[3] += d;
        h_[4] += e; h_[5] += f; h_[6] += g; h_[7] += h;
    }

    std::array<std::uint32_t, 8> h_;
    std::array<unsigned char, 64> buf_;
    std::size_t buf_len_ = 0;
    std::uint64_t total_ = 0;
};

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void dump_rec(const json& j, std::string& out) {
    switch (j.type()) {
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // nlohmann sorts keys
                if (!first) out += ',';
                first = false;
                out += json(it.key()).dump();
                out += ':';
                dump_rec(it.value(), out);
            }
            out += '}';
            break;
        }
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& el : j) {
                if (!first) out += ',';
                first = false;
                dump_rec(el, out);
            }
            out += ']';
            break;
        }
        case json::value_t::number_float:
            out += format_number(j.get<double>());
            break;
        default:
            out += j.dump();
            break;
    }
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Vec& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Mat matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw DegenerateInput("io: expected matrix rows");
    int rows = static_cast<int>(j.size());
    int cols = static_cast<int>(j[0].size());
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw DegenerateInput("io: ragged matrix");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Vec vector_from_json(const json& j) {
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

}  // namespace

std::string canonical_dump(const json& j) {
    std::string out;
    dump_rec(j, out);
    return out;
}

std::string sha256_hex(const std::string& data) {
    Sha256 h;
    h.update(reinterpret_cast<const unsigned char*>(data.data()), data.size());
    auto digest = h.digest();
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (unsigned char byte : digest) {
        out.push_back(hex[byte >> 4]);
        out.push_back(hex[byte & 0xf]);
    }
    return out;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw DegenerateInput("io: failed to parse " + path + ": " + ex.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("io: cannot write " + path);
    out << text;
}

PwaDynamics system_from_json(const json& j) {
    if (!j.contains("dim") || !j.contains("cells"))
        throw DegenerateInput("io: system file needs dim and cells");
    int dim = j["dim"].get<int>();
    std::vector<CellSpec> specs;
    std::vector<std::pair<int, CellSpec>> ordered;
    for (const auto& cj : j["cells"]) {
        CellSpec spec;
        spec.E = matrix_from_json(cj.at("E"));
        spec.e = vector_from_json(cj.at("e"));
        spec.A = matrix_from_json(cj.at("A"));
        spec.a = vector_from_json(cj.at("a"));
        if (spec.E.cols() != dim)
            throw DegenerateInput("io: cell facet matrix has wrong width");
        if (cj.contains("vertices"))
            for (const auto& vj : cj["vertices"]) spec.vertices.push_back(vector_from_json(vj));
        int id = cj.value("id", static_cast<int>(ordered.size()));
        ordered.emplace_back(id, std::move(spec));
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [id, spec] : ordered) specs.push_back(std::move(spec));
    return PwaDynamics::from_cells(specs);
}

PwaDynamics load_system(const std::string& path) {
    return system_from_json(load_json_file(path));
}

json system_to_json(const PwaDynamics& d) {
    json j;
    j["dim"] = d.dim();
    json cells = json::array();
    for (const Cell& c : d.cells()) {
        json cj;
        cj["id"] = c.id;
        cj["E"] = matrix_to_json(c.hrep.E);
        cj["e"] = vector_to_json(c.hrep.e);
        cj["A"] = matrix_to_json(c.A);
        cj["a"] = vector_to_json(c.a);
        json verts = json::array();
        for (const Point& v : c.vrep.vertices) verts.push_back(vector_to_json(v));
        cj["vertices"] = std::move(verts);
        cells.push_back(std::move(cj));
    }
    j["cells"] = std::move(cells);
    return j;
}

void save_system(const PwaDynamics& d, const std::string& path) {
    write_text_file(path, canonical_dump(system_to_json(d)) + "\n");
}

std::string partition_hash(const PwaDynamics& d) {
    return sha256_hex(canonical_dump(system_to_json(d)["cells"]));
}

bool looks_like_network(const json& j) {
    return j.contains("W1") && j.contains("W2") && j.contains("b1") && j.contains("b2");
}

NetworkFile load_network(const std::string& path) {
    json j = load_json_file(path);
    if (!looks_like_network(j) || !j.contains("box_lo") || !j.contains("box_hi"))
        throw DegenerateInput("io: not a network file: " + path);
    NetworkFile nf;
    nf.net.W1 = matrix_from_json(j["W1"]);
    nf.net.b1 = vector_from_json(j["b1"]);
    nf.net.W2 = matrix_from_json(j["W2"]);
    nf.net.b2 = vector_from_json(j["b2"]);
    Vec lo = vector_from_json(j["box_lo"]);
    Vec hi = vector_from_json(j["box_hi"]);
    if (lo.size() != hi.size() || lo.size() != nf.net.W1.cols())
        throw DegenerateInput("io: network box does not match input width");
    if (!((lo.array() < hi.array()).all()))
        throw DegenerateInput("io: network box is empty");
    const int n = static_cast<int>(lo.size());
    Mat E(2 * n, n);
    Vec e(2 * n);
    E.topRows(n) = Mat::Identity(n, n);
    E.bottomRows(n) = -Mat::Identity(n, n);
    e.head(n) = -lo;
    e.tail(n) = hi;
    nf.box = HPolytope(E, e);
    return nf;
}

BarrierFile load_barrier(const std::string& path) {
    json j = load_json_file(path);
    BarrierFile bf;
    bf.alpha.alpha_tilde = j.at("alpha").get<double>();
    Vec eps = vector_from_json(j.at("eps"));
    if (eps.size() != 3) throw DegenerateInput("io: eps must have three entries");
    bf.eps = Epsilons{eps[0], eps[1], eps[2]};
    bf.partition_hash = j.at("partition_hash").get<std::string>();
    std::vector<std::pair<int, std::pair<Vec, double>>> ordered;
    for (const auto& cj : j.at("cells"))
        ordered.emplace_back(cj.at("id").get<int>(),
                             std::make_pair(vector_from_json(cj.at("p")),
                                            cj.at("q").get<double>()));
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [id, pq] : ordered) {
        bf.barrier.p.push_back(std::move(pq.first));
        bf.barrier.q.push_back(pq.second);
    }
    return bf;
}

void save_barrier(const BarrierCandidate& b, AlphaGain alpha, Epsilons eps,
                  const std::string& hash, const std::string& path) {
    json j;
    j["alpha"] = alpha.alpha_tilde;
    j["eps"] = json::array({eps.eps1, eps.eps2, eps.eps3});
    j["partition_hash"] = hash;
    json cells = json::array();
    for (int i = 0; i < b.num_cells(); ++i) {
        json cj;
        cj["id"] = i;
        cj["p"] = vector_to_json(b.p[i]);
        cj["q"] = b.q[i];
        cells.push_back(std::move(cj));
    }
    j["cells"] = std::move(cells);
    write_text_file(path, canonical_dump(j) + "\n");
}

}  // namespace pwabf::io
