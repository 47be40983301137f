#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace smc {

/// Argument outside the mathematical domain of an operation (NaN input,
/// probability outside (0,1), non-positive variance, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Too few samples for the requested statistic.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or request (bad ranges, mismatched lengths).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnknownObservableError : public std::runtime_error {
public:
    explicit UnknownObservableError(const std::string& name)
        : std::runtime_error("unknown observable '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// A model step hit a numerically degenerate state (price on a boundary,
/// clearing solver failure).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed reply or transport failure on the external simulator wire.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A replication could not be completed. Carries the seed so the failing
/// trajectory can be reproduced in isolation.
class ReplicationFailedError : public std::runtime_error {
public:
    static constexpr std::uint64_t kNoIndex = ~std::uint64_t{0};

    ReplicationFailedError(std::uint64_t replication, std::uint64_t seed, const std::string& cause)
        : std::runtime_error(describe(replication, seed, cause)),
          replication_(replication),
          seed_(seed),
          cause_(cause) {}
    ReplicationFailedError(std::uint64_t seed, const std::string& cause)
        : ReplicationFailedError(kNoIndex, seed, cause) {}

    std::uint64_t replication() const noexcept { return replication_; }
    bool hasReplication() const noexcept { return replication_ != kNoIndex; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::string& cause() const noexcept { return cause_; }

private:
    static std::string describe(std::uint64_t replication, std::uint64_t seed, const std::string& cause) {
        std::string head = replication == kNoIndex ? std::string("trajectory")
                                                   : "replication " + std::to_string(replication);
        return head + " (seed " + std::to_string(seed) + ") failed: " + cause;
    }

    std::uint64_t replication_;
    std::uint64_t seed_;
    std::string cause_;
};

}  // namespace smc
