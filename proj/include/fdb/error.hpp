#ifndef FDB_ERROR_HPP
#define FDB_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fdb {

enum class errc {
    empty_input,
    domain_error,
    not_positive_definite,
    dimension_error,
    convergence_failure,
    degenerate_data,
    invalid_subset_size,
    singular_covariance,
    too_few_weighted_samples,
    oracle_too_large,
    invalid_contamination,
    singular_transform,
    invalid_rule,
};

constexpr std::string_view to_string(errc code) noexcept
{
    switch (code) {
    case errc::empty_input: return "EmptyInput";
    case errc::domain_error: return "DomainError";
    case errc::not_positive_definite: return "NotPositiveDefinite";
    case errc::dimension_error: return "DimensionError";
    case errc::convergence_failure: return "ConvergenceFailure";
    case errc::degenerate_data: return "DegenerateData";
    case errc::invalid_subset_size: return "InvalidSubsetSize";
    case errc::singular_covariance: return "SingularCovariance";
    case errc::too_few_weighted_samples: return "TooFewWeightedSamples";
    case errc::oracle_too_large: return "OracleTooLarge";
    case errc::invalid_contamination: return "InvalidContamination";
    case errc::singular_transform: return "SingularTransform";
    case errc::invalid_rule: return "InvalidRule";
    }
    return "Unknown";
}

/// Library-wide exception. Carries a machine-checkable code, an optional
/// pipeline stage label (set by the estimators when they rethrow), and for
/// factorization failures the index of the offending pivot.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what, std::optional<std::size_t> pivot = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), pivot_(pivot)
    {
    }

    errc code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }
    std::optional<std::size_t> pivot() const noexcept { return pivot_; }

    error with_stage(std::string stage) const
    {
        error e(*this);
        e.stage_ = std::move(stage);
        e.message_ = "[" + e.stage_ + "] " + std::runtime_error::what();
        return e;
    }

    const char* what() const noexcept override
    {
        return message_.empty() ? std::runtime_error::what() : message_.c_str();
    }

private:
    errc code_;
    std::optional<std::size_t> pivot_;
    std::string stage_;
    std::string message_;
};

/// Runs `fn`, relabelling any fdb::error it throws with `stage` (an
/// existing label is kept so that the innermost stage wins).
template <class Fn>
decltype(auto) with_stage(std::string_view stage, Fn&& fn)
{
    try {
        return fn();
    } catch (const error& e) {
        if (!e.stage().empty())
            throw;
        throw e.with_stage(std::string(stage));
    }
}

} // namespace fdb

#endif
