#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "uabs/comps.hpp"

namespace uabs {

/// Archive file defects, distinguishable by kind.
class ArchiveError : public std::runtime_error {
public:
    enum class Kind { format, version, truncated, checksum };

    ArchiveError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Persist the meta-learner state (theta0 plus the full experience archive)
/// as a versioned, checksummed container. Round-trips bitwise.
void save_archive(const MetaState& state, const std::filesystem::path& path);
MetaState load_archive(const std::filesystem::path& path);

}  // namespace uabs
