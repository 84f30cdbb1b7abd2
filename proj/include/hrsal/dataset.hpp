/**
 * @file dataset.hpp
 * @brief Image / ground-truth pair discovery.
 *
 * Paired directories pair `images/NAME.(png|jpg|jpeg)` with `gt/NAME.png`
 * by file stem. Manifest files hold CSV lines `image,gt`; relative paths are
 * resolved against the manifest's directory and a leading `image,gt` header
 * is skipped. Entries without a counterpart land in the skip report.
 */
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrsal {

enum class DatasetLayout { PairedDirs, ManifestFile };

struct DatasetEntry {
    std::string id;
    std::filesystem::path image;
    std::filesystem::path gt;
};

struct ResolutionStats {
    std::size_t probed = 0;  ///< entries whose header could be read
    int min_width = 0;
    int min_height = 0;
    int max_width = 0;
    int max_height = 0;
    double mean_width = 0.0;
    double mean_height = 0.0;
};

struct DatasetManifest {
    std::string name;
    std::vector<DatasetEntry> entries;  ///< sorted by id
    std::vector<std::string> skipped;   ///< "path: reason"
    ResolutionStats resolution;
};

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws DatasetError when the source is unreadable or yields no pairs.
DatasetManifest load_dataset(const std::filesystem::path& root, DatasetLayout layout);

/// Pairs files of `left` with files of `right` by stem (used for
/// prediction-vs-ground-truth directories).
DatasetManifest pair_directories(const std::filesystem::path& left, const std::filesystem::path& right,
                                 const std::string& name);

/// Splits one RFC-4180 CSV record (no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace hrsal
