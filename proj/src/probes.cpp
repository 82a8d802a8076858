#include "dtrace/probes.hpp"

#include <stdexcept>

namespace dtrace {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ splitmix64(v)); }

}  // namespace

ProbeBatch rademacher_batch(std::uint64_t seed, std::uint64_t step, Index count, Index dim,
                            std::uint64_t stream) {
    if (count < 1 || dim < 1) throw std::invalid_argument("rademacher_batch: count and dim must be >= 1");
    ProbeBatch batch{seed, step, stream, Matrix(dim, count)};
    const std::uint64_t key = mix(mix(mix(0x5eedULL, seed), step), stream);
    for (Index c = 0; c < count; ++c) {
        const std::uint64_t column_key = mix(key, static_cast<std::uint64_t>(c));
        std::uint64_t bits = 0;
        for (Index i = 0; i < dim; ++i) {
            // 64 signs per hash evaluation
            if (i % 64 == 0) bits = mix(column_key, static_cast<std::uint64_t>(i / 64));
            batch.vectors(i, c) = (bits & 1ULL) ? 1.0 : -1.0;
            bits >>= 1;
        }
    }
    return batch;
}

Vector column_forms(const Matrix& probes, const Matrix& responses) {
    if (probes.rows() != responses.rows() || probes.cols() != responses.cols())
        throw std::invalid_argument("column_forms: shape mismatch");
    return probes.cwiseProduct(responses).colwise().sum().transpose();
}

QuadraticSamples quadratic_samples(const MatVecOracle& oracle, const ProbeBatch& batch) {
    if (oracle.dim() != batch.dim())
        throw std::invalid_argument("quadratic_samples: oracle dimension does not match probe dimension");
    QuadraticSamples out;
    out.responses = oracle.apply(batch.vectors);
    out.forms = column_forms(batch.vectors, out.responses);
    return out;
}

}  // namespace dtrace
