/*
 * Copyright (c) 2026 The saelstm Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "saelstm/synthetic.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "saelstm/errors.hpp"
#include "saelstm/random.hpp"

namespace saelstm {

namespace {

constexpr std::array<const char*, 3> kLabels = {"A", "S", "SS"};
// UGRansome19Train shares: 40323 / 25822 / 9656.
constexpr std::array<double, 3> kClassShare = {40323.0 / 75801.0, 25822.0 / 75801.0, 9656.0 / 75801.0};
constexpr double kBackgroundRate = 0.3;

struct CategoricalColumn {
  std::vector<std::string> values;
  std::array<std::vector<double>, 3> weights;  // per class, unnormalized
};

struct NumericRange {
  std::array<std::pair<double, double>, 3> per_class;
  std::pair<double, double> background;
  bool integer = false;
};

std::size_t draw_weighted(Rng& rng, const std::vector<double>& w) {
  double total = 0.0;
  for (double v : w) total += v;
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

std::string draw_categorical(Rng& rng, const CategoricalColumn& col, std::size_t cls) {
  if (rng.uniform01() < kBackgroundRate) return col.values[rng.index(col.values.size())];
  return col.values[draw_weighted(rng, col.weights[cls])];
}

std::string draw_numeric(Rng& rng, const NumericRange& range, std::size_t cls) {
  const auto [lo, hi] = rng.uniform01() < kBackgroundRate ? range.background : range.per_class[cls];
  double v = rng.uniform(lo, hi);
  if (range.integer) v = std::floor(v);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string address(Rng& rng, std::size_t pool) {
  static constexpr char kAlphabet[] = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
  const std::uint64_t id = rng.index(pool);
  Rng local(derive_seed(0xADD7E55, id));
  std::string s = "1";
  for (int i = 0; i < 7; ++i) s.push_back(kAlphabet[local.index(sizeof(kAlphabet) - 1)]);
  return s;
}

}  // namespace

std::string synthetic_ugransome_csv(std::size_t rows, std::uint64_t seed) {
  const CategoricalColumn protocol{{"ICMP", "TCP", "UDP"}, {{{0.1, 0.7, 0.2}, {0.1, 0.2, 0.7}, {0.5, 0.3, 0.2}}}};
  const CategoricalColumn flag{{"A", "AP", "APRS", "APS", "AR", "F", "FA"},
                               {{{4, 3, 0.2, 0.2, 0.2, 0.2, 0.2},
                                 {0.2, 0.2, 4, 3, 0.2, 0.2, 0.2},
                                 {0.2, 0.2, 0.2, 0.2, 3, 3, 2}}}};
  const CategoricalColumn family{
      {"APT", "CryptXXX", "CryptoLocker", "DMALocker", "EDA2", "Globe", "JigSaw", "Locky", "NoobCrypt", "Razy",
       "SamSam", "TowerWeb", "WannaCry"},
      {{{3, 0.1, 0.1, 0.1, 2, 0.1, 0.1, 0.1, 2, 0.1, 0.1, 2, 0.1},
        {0.1, 2, 3, 0.1, 0.1, 0.1, 0.1, 3, 0.1, 0.1, 0.1, 0.1, 2},
        {0.1, 0.1, 0.1, 3, 0.1, 2, 2, 0.1, 0.1, 2, 2, 0.1, 0.1}}}};
  const CategoricalColumn ip{{"A", "B", "C", "D"}, {{{3, 1, 0.3, 0.3}, {0.3, 1, 3, 0.3}, {0.3, 0.3, 1, 3}}}};
  const CategoricalColumn threats{
      {"Blacklist", "Bonet", "DoS", "NerisBonet", "Port Scanning", "SSH", "Scan", "Spam", "UDP Scan"},
      {{{0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 3, 0.2, 3},
        {3, 0.2, 2, 0.2, 0.2, 0.2, 0.2, 3, 0.2},
        {0.2, 3, 0.2, 3, 2, 2, 0.2, 0.2, 0.2}}}};
  const NumericRange time{{{{0, 60}, {0, 60}, {0, 60}}}, {0, 60}, true};
  const NumericRange clusters{{{{1, 4}, {4, 8}, {8, 13}}}, {1, 13}, true};
  const NumericRange btc{{{{1, 20}, {20, 120}, {100, 400}}}, {1, 400}, true};
  const NumericRange usd{{{{50, 1500}, {1000, 9000}, {8000, 40000}}}, {50, 40000}, true};
  const NumericRange bytes{{{{100, 800}, {600, 1600}, {1400, 3000}}}, {100, 3000}, true};
  const NumericRange port{{{{5061, 5063}, {5063, 5066}, {5066, 5069}}}, {5061, 5069}, true};

  Rng rng(seed);
  std::ostringstream out;
  out << "Time,Protcol,Flag,Family,Clusters,SeddAddress,ExpAddress,BTC,USD,Netflow_Bytes,IPaddress,Threats,Port,"
         "Prediction\n";
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t cls =
        draw_weighted(rng, std::vector<double>(kClassShare.begin(), kClassShare.end()));
    out << draw_numeric(rng, time, cls) << ',' << draw_categorical(rng, protocol, cls) << ','
        << draw_categorical(rng, flag, cls) << ',' << draw_categorical(rng, family, cls) << ','
        << draw_numeric(rng, clusters, cls) << ',' << address(rng, 60) << ',' << address(rng, 60) << ','
        << draw_numeric(rng, btc, cls) << ',' << draw_numeric(rng, usd, cls) << ','
        << draw_numeric(rng, bytes, cls) << ',' << draw_categorical(rng, ip, cls) << ','
        << draw_categorical(rng, threats, cls) << ',' << draw_numeric(rng, port, cls) << ',' << kLabels[cls]
        << '\n';
  }
  return out.str();
}

void write_synthetic_ugransome(const std::filesystem::path& path, std::size_t rows, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << synthetic_ugransome_csv(rows, seed);
}

Matrix low_rank_table(std::size_t rows, std::size_t width, std::size_t rank, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Matrix basis(rank, width);
  for (double& v : basis.values()) v = rng.uniform01();
  Matrix out(rows, width);
  for (std::size_t r = 0; r < rows; ++r) {
    Vector coef(rank);
    double total = 0.0;
    for (double& c : coef) {
      c = rng.uniform01();
      total += c;
    }
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      for (std::size_t k = 0; k < rank; ++k) v += coef[k] * basis(k, c);
      v = v / total + noise * rng.normal();
      out(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

LabeledTable separable_clusters(std::size_t per_class, std::size_t classes, std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  Matrix centers(classes, width);
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t c = 0; c < width; ++c) {
      // Alternating corner patterns keep centers far apart.
      centers(k, c) = ((c + k) % classes == 0) ? 0.9 : 0.1;
    }
  }
  LabeledTable t;
  t.features = Matrix(per_class * classes, width);
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    const std::size_t k = i % classes;
    for (std::size_t c = 0; c < width; ++c) {
      t.features(i, c) = std::clamp(centers(k, c) + 0.05 * rng.normal(), 0.0, 1.0);
    }
    t.labels.push_back(static_cast<int>(k));
  }
  return t;
}

}  // namespace saelstm
