#pragma once

#include "oracles.hpp"

#include "mandikin/motion.hpp"

#include <random>
#include <string>

// Random inputs for format round trips and byte-level mutation fuzzing.
namespace fuzz {

using namespace mandikin;

inline double random_double(std::mt19937_64& rng) {
    // Mix of magnitudes, including exact integers and tiny values.
    std::uniform_int_distribution<int> kind(0, 3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(-20, 20);
    switch (kind(rng)) {
        case 0:
            return u(rng) * 100.0;
        case 1:
            return std::ldexp(u(rng), ex(rng));
        case 2:
            return std::round(u(rng) * 1000.0);
        default:
            return u(rng) * 1e-3;
    }
}

inline TriangleMesh random_mesh(std::mt19937_64& rng, bool float_exact, bool normals) {
    std::uniform_int_distribution<int> count(3, 30);
    TriangleMesh m;
    const int nv = count(rng);
    for (int i = 0; i < nv; ++i) {
        Vec3 p = oracle::random_vec(rng, 50);
        if (float_exact) p = p.cast<float>().cast<double>();
        m.vertices.push_back(p);
    }
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(nv - 1));
    const int nf = count(rng);
    while (static_cast<int>(m.faces.size()) < nf) {
        const Face f{pick(rng), pick(rng), pick(rng)};
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
        const Vec3 n = (m.vertices[f[1]] - m.vertices[f[0]]).cross(m.vertices[f[2]] - m.vertices[f[0]]);
        if (0.5 * n.norm() < 1e-3) continue;
        m.faces.push_back(f);
    }
    if (normals) {
        for (int i = 0; i < nv; ++i) m.normals.push_back(oracle::random_unit(rng));
    }
    return m;
}

// Random byte edits: replace, insert, delete, truncate or duplicate a line.
inline std::string mutate(const std::string& s, std::mt19937_64& rng) {
    std::string out = s;
    std::uniform_int_distribution<int> op(0, 4);
    const std::string alphabet = "0123456789-+.eE, \n\t/#abcxyz{}[]\":";
    std::uniform_int_distribution<std::size_t> ch(0, alphabet.size() - 1);
    if (out.empty()) return "x";
    std::uniform_int_distribution<std::size_t> pos(0, out.size() - 1);
    switch (op(rng)) {
        case 0:
            out[pos(rng)] = alphabet[ch(rng)];
            break;
        case 1:
            out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos(rng)), alphabet[ch(rng)]);
            break;
        case 2:
            out.erase(pos(rng), 1);
            break;
        case 3:
            out.resize(pos(rng));
            break;
        default: {
            const std::size_t p = pos(rng);
            const std::size_t start = out.rfind('\n', p) == std::string::npos ? 0 : out.rfind('\n', p) + 1;
            const std::size_t end = out.find('\n', p);
            const std::string line = out.substr(start, end == std::string::npos ? std::string::npos : end - start + 1);
            out.insert(start, line);
        }
    }
    return out;
}

inline MotionSequence random_motion(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 20);
    std::uniform_real_distribution<double> dt(1e-4, 0.1);
    MotionSequence seq;
    double t = std::abs(random_double(rng));
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        MotionSample s;
        s.time = t;
        t += dt(rng);
        for (auto* tri : {&s.upper, &s.lower}) {
            for (Vec3& p : tri->points) p = Vec3(random_double(rng), random_double(rng), random_double(rng));
        }
        seq.samples.push_back(s);
    }
    seq.nominal_rate_hz = n > 1 ? (n - 1) / (seq.samples.back().time - seq.samples.front().time) : 0.0;
    return seq;
}

}  // namespace fuzz
