#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace face {

// One subject's irregularly spaced observations. `times` is kept sorted
// non-decreasing with `values` permuted in lockstep; ties are allowed.
struct SubjectRecord {
    std::string id;
    std::vector<double> times;
    std::vector<double> values;

    std::size_t size() const { return times.size(); }
};

// Affine map between the input time axis and [0,1].
struct TimeDomain {
    double t_min = 0.0;
    double t_max = 1.0;

    double to_unit(double t) const { return (t - t_min) / (t_max - t_min); }
    double from_unit(double u) const { return t_min + u * (t_max - t_min); }
};

// Sparse functional data grouped by subject, in first-appearance order.
class SparseFunctionalDataset {
public:
    SparseFunctionalDataset() = default;

    // Validates (n >= 1, m_i >= 1, equal lengths, finite values) and sorts
    // each subject's observations by time.
    explicit SparseFunctionalDataset(std::vector<SubjectRecord> subjects,
                                     TimeDomain domain = {}, bool rescaled = false);

    const std::vector<SubjectRecord>& subjects() const { return subjects_; }
    const SubjectRecord& subject(std::size_t i) const { return subjects_.at(i); }
    std::size_t n() const { return subjects_.size(); }
    std::size_t total_observations() const;
    // Sum over subjects of m_i (m_i + 1) / 2: the number of raw covariance products.
    std::size_t total_products() const;
    std::size_t max_observations() const;

    // Raw-input time range; equals the stored rescaling constants once rescaled.
    const TimeDomain& time_domain() const { return domain_; }
    bool is_rescaled() const { return rescaled_; }

    // Index of the subject with the given id, or npos.
    std::size_t find(const std::string& id) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::vector<double> pooled_times() const;

private:
    std::vector<SubjectRecord> subjects_;
    TimeDomain domain_;
    bool rescaled_ = false;
};

// Parses `subject_id,time,value` CSV. Row numbers in errors are 1-based
// file lines (the header is line 1).
SparseFunctionalDataset read_csv(std::istream& in);
SparseFunctionalDataset load_csv(const std::filesystem::path& path);

// Maps all times to [0,1] via (t - t_min) / (t_max - t_min) and records the
// constants. Applying it to an already rescaled dataset is a no-op.
SparseFunctionalDataset rescale_time(const SparseFunctionalDataset& ds);

// Same as above but with externally supplied constants (e.g. from a stored fit).
SparseFunctionalDataset rescale_time(const SparseFunctionalDataset& ds, const TimeDomain& domain);

}  // namespace face
