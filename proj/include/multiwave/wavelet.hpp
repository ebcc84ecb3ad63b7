#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace multiwave::wavelet {

// One named sample vector with its sampling rate.
struct Signal {
  std::string name;
  std::vector<double> values;
  double rate = 0.0;  // Hz

  double duration() const { return values.size() / rate; }
};

// Orthonormal two-channel filter bank. Reconstruction filters are the
// time-reversed decimation filters (the synthesis operator is the
// adjoint of the periodized analysis operator).
struct WaveletFilters {
  std::string name;
  std::vector<double> lowpass_dec;
  std::vector<double> highpass_dec;
  std::vector<double> lowpass_rec;
  std::vector<double> highpass_rec;
};

WaveletFilters haar();
// Builds the quadrature-mirror highpass and the reconstruction filters
// from an orthonormal lowpass. Throws if the coefficients are not
// orthonormal (sum of squares 1, even-shift orthogonality).
WaveletFilters from_lowpass(const std::string& name,
                            std::vector<double> lowpass);
// Registry lookup by name ("haar", "db2").
WaveletFilters by_name(const std::string& name);

// Frequency interval covered by a band. Detail level j of a
// signal at `rate` is labeled (rate/2^j, rate/2^(j-1)); the level-L
// approximation is (0, rate/2^L).
std::pair<double, double> band_label(double rate, std::size_t level,
                                     bool is_approx);

struct Subsignal {
  std::vector<double> values;
  std::size_t level = 0;   // 1..L for details, L for the approximation
  bool is_approx = false;
  double rate = 0.0;       // implied rate of this band
  double band_low = 0.0, band_high = 0.0;
};

struct Decomposition {
  std::string source_name;
  double source_rate = 0.0;
  std::size_t levels = 0;
  // S_1..S_L are details, S_{L+1} the approximation.
  std::vector<Subsignal> subsignals;
  // Length of the input at each analysis step, needed to undo the
  // odd-length padding on reconstruction.
  std::vector<std::size_t> step_lengths;

  const Subsignal& detail(std::size_t level) const {
    return subsignals.at(level - 1);
  }
  const Subsignal& approx() const { return subsignals.back(); }
};

// Single analysis step: filter with both decimation filters and
// downsample by 2. Odd lengths get half-sample symmetric padding first;
// output length is ceil(n/2).
std::pair<std::vector<double>, std::vector<double>> dwt_step(
    const std::vector<double>& values, const WaveletFilters& filters);

std::size_t max_levels(std::size_t len);

Decomposition decompose(const Signal& signal, const WaveletFilters& filters,
                        std::size_t levels);

std::vector<double> reconstruct(const Decomposition& dec,
                                const WaveletFilters& filters);

// JSON layout documented in the README; consumed by the CLI.
std::string to_json(const Decomposition& dec);

}  // namespace multiwave::wavelet
