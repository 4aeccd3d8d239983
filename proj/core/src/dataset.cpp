#include "face/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "face/error.hpp"

namespace face {

namespace {

void sort_by_time(SubjectRecord& rec) {
    std::vector<std::size_t> order(rec.times.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rec.times[a] < rec.times[b]; });
    std::vector<double> t(order.size()), y(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        t[k] = rec.times[order[k]];
        y[k] = rec.values[order[k]];
    }
    rec.times = std::move(t);
    rec.values = std::move(y);
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, std::size_t row, const char* column) {
    if (text.empty()) {
        throw DataError("row " + std::to_string(row) + ": missing " + column + " field");
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw DataError("row " + std::to_string(row) + ": cannot parse " + column + " '" + text + "'");
    }
    if (used != text.size()) {
        throw DataError("row " + std::to_string(row) + ": cannot parse " + column + " '" + text + "'");
    }
    if (!std::isfinite(v)) {
        throw DataError("row " + std::to_string(row) + ": non-finite " + column + " '" + text + "'");
    }
    return v;
}

}  // namespace

SparseFunctionalDataset::SparseFunctionalDataset(std::vector<SubjectRecord> subjects, TimeDomain domain,
                                                 bool rescaled)
    : subjects_(std::move(subjects)), domain_(domain), rescaled_(rescaled) {
    if (subjects_.empty()) throw DataError("dataset has no subjects");
    for (auto& rec : subjects_) {
        if (rec.times.size() != rec.values.size()) {
            throw DataError("subject '" + rec.id + "': times and values differ in length");
        }
        if (rec.times.empty()) throw DataError("subject '" + rec.id + "' has no observations");
        for (std::size_t j = 0; j < rec.times.size(); ++j) {
            if (!std::isfinite(rec.times[j]) || !std::isfinite(rec.values[j])) {
                throw DataError("subject '" + rec.id + "' has a non-finite observation");
            }
        }
        sort_by_time(rec);
    }
    if (!rescaled_) {
        double lo = subjects_.front().times.front();
        double hi = lo;
        for (const auto& rec : subjects_) {
            lo = std::min(lo, rec.times.front());
            hi = std::max(hi, rec.times.back());
        }
        domain_ = {lo, hi};
    }
}

std::size_t SparseFunctionalDataset::total_observations() const {
    std::size_t total = 0;
    for (const auto& rec : subjects_) total += rec.size();
    return total;
}

std::size_t SparseFunctionalDataset::total_products() const {
    std::size_t total = 0;
    for (const auto& rec : subjects_) total += rec.size() * (rec.size() + 1) / 2;
    return total;
}

std::size_t SparseFunctionalDataset::max_observations() const {
    std::size_t m = 0;
    for (const auto& rec : subjects_) m = std::max(m, rec.size());
    return m;
}

std::size_t SparseFunctionalDataset::find(const std::string& id) const {
    for (std::size_t i = 0; i < subjects_.size(); ++i) {
        if (subjects_[i].id == id) return i;
    }
    return npos;
}

std::vector<double> SparseFunctionalDataset::pooled_times() const {
    std::vector<double> out;
    out.reserve(total_observations());
    for (const auto& rec : subjects_) out.insert(out.end(), rec.times.begin(), rec.times.end());
    return out;
}

SparseFunctionalDataset read_csv(std::istream& in) {
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) throw DataError("empty file: expected header 'subject_id,time,value'");
    ++row;
    if (!line.empty() && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_fields(line);
    if (header.size() != 3 || header[0] != "subject_id" || header[1] != "time" || header[2] != "value") {
        throw DataError("row 1: expected header 'subject_id,time,value', got '" + line + "'");
    }

    std::vector<SubjectRecord> subjects;
    std::unordered_map<std::string, std::size_t> index;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 3) {
            throw DataError("row " + std::to_string(row) + ": expected 3 fields, got " +
                            std::to_string(fields.size()));
        }
        if (fields[0].empty()) throw DataError("row " + std::to_string(row) + ": missing subject_id field");
        const double t = parse_number(fields[1], row, "time");
        const double y = parse_number(fields[2], row, "value");
        auto [it, inserted] = index.try_emplace(fields[0], subjects.size());
        if (inserted) subjects.push_back(SubjectRecord{fields[0], {}, {}});
        subjects[it->second].times.push_back(t);
        subjects[it->second].values.push_back(y);
    }
    if (subjects.empty()) throw DataError("file contains a header but no observations");
    return SparseFunctionalDataset(std::move(subjects));
}

SparseFunctionalDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_csv(in);
}

SparseFunctionalDataset rescale_time(const SparseFunctionalDataset& ds) {
    if (ds.is_rescaled()) return ds;
    const TimeDomain& dom = ds.time_domain();
    if (!(dom.t_max > dom.t_min)) {
        throw DataError("all observation times are identical; cannot rescale to [0,1]");
    }
    return rescale_time(ds, dom);
}

SparseFunctionalDataset rescale_time(const SparseFunctionalDataset& ds, const TimeDomain& domain) {
    if (!(domain.t_max > domain.t_min)) throw DomainError("time domain must satisfy t_max > t_min");
    std::vector<SubjectRecord> out = ds.subjects();
    for (auto& rec : out) {
        for (double& t : rec.times) {
            // An already-rescaled dataset is first mapped back to raw units.
            const double raw = ds.is_rescaled() ? ds.time_domain().from_unit(t) : t;
            double u = domain.to_unit(raw);
            if (u < 0.0 && u > -1e-12) u = 0.0;
            if (u > 1.0 && u < 1.0 + 1e-12) u = 1.0;
            if (u < 0.0 || u > 1.0) {
                throw DomainError("subject '" + rec.id + "': time " + std::to_string(raw) +
                                  " lies outside the fitted time domain");
            }
            t = u;
        }
    }
    return SparseFunctionalDataset(std::move(out), domain, true);
}

}  // namespace face
