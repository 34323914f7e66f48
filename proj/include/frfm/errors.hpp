#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace frfm {

// Caller misuse: bad arguments, invalid configuration. Maps to CLI exit code 2.
class argument_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Data or processing failure on otherwise valid usage. Maps to CLI exit code 1.
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class grid_error : public data_error {
public:
    using data_error::data_error;
};

class domain_error : public data_error {
public:
    using data_error::data_error;
};

class parse_error : public data_error {
public:
    using data_error::data_error;
};

class degenerate_signal : public data_error {
public:
    using data_error::data_error;
};

class invalid_distance : public data_error {
public:
    using data_error::data_error;
};

class io_error : public data_error {
public:
    using data_error::data_error;
};

class insufficient_peaks : public data_error {
public:
    insufficient_peaks(std::size_t found_count, std::size_t requested_count)
        : data_error("find_peaks: found " + std::to_string(found_count) +
                     " qualifying peaks, requested " + std::to_string(requested_count)),
          found(found_count),
          requested(requested_count) {}

    std::size_t found;
    std::size_t requested;
};

class insufficient_samples : public argument_error {
public:
    using argument_error::argument_error;
};

class insufficient_averages : public argument_error {
public:
    using argument_error::argument_error;
};

}  // namespace frfm
