#include "dbtalk/augmenter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "dbtalk/errors.hpp"
#include "dbtalk/parser.hpp"
#include "dbtalk/printer.hpp"
#include "dbtalk/typecheck.hpp"
#include "dbtalk/units.hpp"

namespace dbtalk {

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// days <-> civil date, for sampling between observed dates
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

long days_of_iso(const std::string& iso) {
  return days_from_civil(std::atoi(iso.substr(0, 4).c_str()), std::atoi(iso.substr(5, 2).c_str()),
                         std::atoi(iso.substr(8, 2).c_str()));
}

std::string iso_of_days(long days) {
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return buf;
}

std::optional<double> magnitude(const Value& v) {
  if (const auto* d = std::get_if<double>(&v.v)) return *d;
  if (const auto* m = std::get_if<MeasureVal>(&v.v)) return m->si;
  if (const auto* c = std::get_if<CurrencyVal>(&v.v)) return c->amount;
  return std::nullopt;
}

}  // namespace

std::string DatasetRecord::sentence_text() const { return join_tokens(sentence); }
std::string DatasetRecord::code_text() const { return join_tokens(code); }

DatasetRecord to_placeholder_record(const Derivation& derivation, std::string id) {
  DatasetRecord rec;
  rec.id = std::move(id);
  for (const auto& tok : derivation.sentence)
    rec.sentence.push_back(tok.is_slot() ? "VALUE_" + std::to_string(tok.slot) : tok.text);
  rec.code = print_tokens(*derivation.ast());
  return rec;
}

const ValuePool::FieldPool* ValuePool::find(const std::string& table,
                                            const std::string& field) const {
  auto it = fields.find({table, field});
  return it == fields.end() ? nullptr : &it->second;
}

ValuePool ValuePool::from_kb(const KnowledgeBase& kb, const NlSchema& schema) {
  ValuePool pool;
  for (const auto& [tname, tdef] : schema.tables) {
    const TableData* data = kb.table(tname);
    if (!data) continue;
    for (const auto& [fname, fdef] : tdef.fields) {
      FieldPool& fp = pool.fields[{tname, fname}];
      std::set<std::string> seen;
      auto consider = [&](const Value& v) {
        if (v.is_null()) return;
        const std::string key = join_tokens(print_tokens(v));
        if (seen.insert(key).second) fp.values.push_back(v);
        if (auto m = magnitude(v)) {
          if (!fp.has_range) {
            fp.min = fp.max = *m;
            fp.has_range = true;
          } else {
            fp.min = std::min(fp.min, *m);
            fp.max = std::max(fp.max, *m);
          }
        }
        if (const auto* d = std::get_if<DateVal>(&v.v)) {
          if (fp.min_date.empty() || d->iso < fp.min_date) fp.min_date = d->iso;
          if (fp.max_date.empty() || d->iso > fp.max_date) fp.max_date = d->iso;
        }
      };
      for (const Row& row : data->rows) {
        auto it = row.find(fname);
        if (it == row.end()) continue;
        if (const auto* arr = std::get_if<ValueList>(&it->second.v)) {
          fp.max_array_len = std::max(fp.max_array_len, static_cast<int>(arr->size()));
          pool.max_link_count[tname] =
              std::max(pool.max_link_count[tname], static_cast<int>(arr->size()));
          for (const Value& item : *arr) consider(item);
        } else {
          consider(it->second);
        }
      }
    }
  }
  return pool;
}

namespace {

struct Sampler {
  const ValuePool& pool;
  std::mt19937_64& rng;

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
  }

  size_t pick_index(size_t n) {
    std::uniform_int_distribution<size_t> dist(0, n - 1);
    return dist(rng);
  }

  /// Two-decimal rounding that stays inside [lo, hi].
  double round_into(double x, double lo, double hi) {
    double rounded = std::round(x * 100.0) / 100.0;
    if (rounded < lo) rounded = std::ceil(lo * 100.0) / 100.0;
    if (rounded > hi) rounded = std::floor(hi * 100.0) / 100.0;
    if (rounded < lo || rounded > hi) return x;  // range narrower than a cent
    return rounded;
  }

  /// Sentence tokens and code tokens for one sampled slot value; nullopt
  /// when no pool can supply the slot.
  std::optional<std::pair<std::vector<std::string>, std::vector<std::string>>> sample(
      const PlaceholderInfo& info) {
    const ValuePool::FieldPool* fp =
        info.table.empty() ? nullptr : pool.find(info.table, info.field);
    using Kind = TypeTag::Kind;
    switch (info.type.kind) {
      case Kind::string:
      case Kind::enumeration: {
        if (!fp || fp->values.empty()) return std::nullopt;
        std::vector<const std::string*> strings;
        for (const auto& v : fp->values)
          if (const auto* s = std::get_if<std::string>(&v.v))
            if (!s->empty()) strings.push_back(s);
        if (strings.empty()) return std::nullopt;
        const std::string& chosen = *strings[pick_index(strings.size())];
        std::vector<std::string> words;
        std::istringstream in(chosen);
        std::string w;
        while (in >> w) words.push_back(w);
        std::vector<std::string> code{"\""};
        code.insert(code.end(), words.begin(), words.end());
        code.push_back("\"");
        return std::make_pair(std::move(words), std::move(code));
      }
      case Kind::number: {
        if (info.exact) {
          if (fp && !fp->values.empty()) {
            std::vector<double> nums;
            for (const auto& v : fp->values)
              if (const auto* d = std::get_if<double>(&v.v)) nums.push_back(*d);
            if (!nums.empty()) {
              const std::string tok = format_number(nums[pick_index(nums.size())]);
              return std::make_pair(std::vector<std::string>{tok},
                                    std::vector<std::string>{tok});
            }
          }
          // ranks, indices, and count comparisons: small positive integers
          int hi = 5;
          if (fp && fp->max_array_len > 1) hi = fp->max_array_len;
          const std::string tok = std::to_string(1 + static_cast<int>(pick_index(hi)));
          return std::make_pair(std::vector<std::string>{tok}, std::vector<std::string>{tok});
        }
        double lo = 1, hi = 5;
        if (fp && fp->has_range) {
          lo = fp->min;
          hi = fp->max;
        } else if (fp && fp->max_array_len > 0) {
          lo = 1;
          hi = fp->max_array_len;
        }
        const std::string tok = format_number(round_into(uniform(lo, hi), lo, hi));
        return std::make_pair(std::vector<std::string>{tok}, std::vector<std::string>{tok});
      }
      case Kind::measure: {
        const std::string unit_tok = default_display_unit(info.type.dimension);
        const UnitDef unit = *unit_from_token(unit_tok);
        double lo_si = unit_to_si(unit, 1), hi_si = unit_to_si(unit, 50);
        if (fp && fp->has_range) {
          lo_si = fp->min;
          hi_si = fp->max;
        }
        double lo = unit_from_si(unit, lo_si), hi = unit_from_si(unit, hi_si);
        if (lo > hi) std::swap(lo, hi);
        const double display = round_into(uniform(lo, hi), lo, hi);
        const std::string num = format_number(display);
        return std::make_pair(std::vector<std::string>{num, unit_tok},
                              std::vector<std::string>{num, unit_tok});
      }
      case Kind::currency: {
        double lo = 5, hi = 100;
        if (fp && fp->has_range) {
          lo = fp->min;
          hi = fp->max;
        }
        const std::string num = format_number(round_into(uniform(lo, hi), lo, hi));
        return std::make_pair(std::vector<std::string>{num, "usd"},
                              std::vector<std::string>{num, "usd"});
      }
      case Kind::date: {
        std::string lo = "2015-01-01", hi = "2024-12-31";
        if (fp && !fp->min_date.empty()) {
          lo = fp->min_date;
          hi = fp->max_date;
        }
        const long lo_d = days_of_iso(lo), hi_d = days_of_iso(hi);
        const long day = lo_d + static_cast<long>(pick_index(hi_d - lo_d + 1));
        const std::string tok = iso_of_days(day);
        return std::make_pair(std::vector<std::string>{tok}, std::vector<std::string>{tok});
      }
      case Kind::time: {
        if (fp && !fp->values.empty()) {
          std::vector<const TimeVal*> times;
          for (const auto& v : fp->values)
            if (const auto* t = std::get_if<TimeVal>(&v.v)) times.push_back(t);
          if (!times.empty() && info.exact) {
            const std::string tok = times[pick_index(times.size())]->hms;
            return std::make_pair(std::vector<std::string>{tok}, std::vector<std::string>{tok});
          }
        }
        char buf[16];
        std::snprintf(buf, sizeof buf, "%02d:%02d:00", static_cast<int>(pick_index(24)),
                      static_cast<int>(pick_index(60)));
        return std::make_pair(std::vector<std::string>{buf}, std::vector<std::string>{buf});
      }
      default:
        return std::nullopt;
    }
  }
};

}  // namespace

std::vector<DatasetRecord> augment(const std::vector<DatasetRecord>& placeholder_records,
                                   const KnowledgeBase& kb, const NlSchema& schema,
                                   int multiplier, std::uint64_t seed, AugmentStats* stats) {
  const ValuePool pool = ValuePool::from_kb(kb, schema);
  std::mt19937_64 rng(seed);
  Sampler sampler{pool, rng};

  std::vector<DatasetRecord> out;
  std::set<std::string> seen;
  AugmentStats local;
  local.input = static_cast<int>(placeholder_records.size());

  for (const auto& rec : placeholder_records) {
    PlaceholderMap slots;
    try {
      AstPtr ast = parse(rec.code);
      typecheck(*ast, schema, &slots);
    } catch (const Error& e) {
      local.dropped += 1;
      local.warnings.push_back("record " + rec.id + " dropped: " + e.what());
      continue;
    }
    const int copies = slots.empty() ? 1 : std::max(1, multiplier);
    for (int m = 0; m < copies; ++m) {
      std::map<int, std::pair<std::vector<std::string>, std::vector<std::string>>> filled;
      bool ok = true;
      for (const auto& [index, info] : slots) {
        auto value = sampler.sample(info);
        if (!value) {
          ok = false;
          local.warnings.push_back("record " + rec.id + " dropped: no pool for VALUE_" +
                                   std::to_string(index) + " (" + info.table + "." + info.field +
                                   ")");
          break;
        }
        filled[index] = std::move(*value);
      }
      if (!ok) {
        local.dropped += 1;
        break;
      }
      auto substitute = [&](const std::vector<std::string>& tokens, bool code_side) {
        std::vector<std::string> result;
        for (const auto& tok : tokens) {
          if (tok.rfind("VALUE_", 0) == 0) {
            const int index = std::atoi(tok.c_str() + 6);
            auto it = filled.find(index);
            if (it != filled.end()) {
              const auto& pair = it->second;
              const auto& repl = code_side ? pair.second : pair.first;
              result.insert(result.end(), repl.begin(), repl.end());
              continue;
            }
          }
          result.push_back(tok);
        }
        return result;
      };
      DatasetRecord filled_rec;
      filled_rec.id = rec.id + "-" + std::to_string(m);
      filled_rec.origin = rec.origin;
      filled_rec.augmentation = m;
      filled_rec.sentence = substitute(rec.sentence, false);
      filled_rec.code = substitute(rec.code, true);
      const std::string key = filled_rec.sentence_text() + "\t" + filled_rec.code_text();
      if (seen.insert(key).second) out.push_back(std::move(filled_rec));
    }
  }

  std::sort(out.begin(), out.end(), [](const DatasetRecord& a, const DatasetRecord& b) {
    if (a.sentence != b.sentence) return a.sentence < b.sentence;
    return a.code < b.code;
  });
  local.emitted = static_cast<int>(out.size());
  if (stats) *stats = std::move(local);
  return out;
}

std::string emit_tsv_text(const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const auto& rec : records) {
    out += rec.id;
    out += '\t';
    out += rec.sentence_text();
    out += '\t';
    out += rec.code_text();
    out += '\n';
  }
  return out;
}

void emit_tsv(const std::vector<DatasetRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset file: " + path.string());
  out << emit_tsv_text(records);
}

std::vector<DatasetRecord> load_tsv_text(const std::string& text) {
  std::vector<DatasetRecord> records;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        line.find('\t', tab2 + 1) != std::string::npos)
      throw Error("line " + std::to_string(line_no) + ": expected exactly two tabs");
    DatasetRecord rec;
    rec.id = line.substr(0, tab1);
    rec.sentence = tokenize(line.substr(tab1 + 1, tab2 - tab1 - 1));
    rec.code = tokenize(line.substr(tab2 + 1));
    if (rec.id.rfind("par", 0) == 0) rec.origin = DatasetRecord::Origin::paraphrase;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DatasetRecord> load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read dataset file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return load_tsv_text(text);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<std::vector<DatasetRecord>> split_dataset(const std::vector<DatasetRecord>& records,
                                                      const std::vector<double>& ratios,
                                                      std::uint64_t seed) {
  double total = 0;
  for (double r : ratios) {
    if (r < 0) throw ConfigError("split ratios must be non-negative");
    total += r;
  }
  if (total <= 0) throw ConfigError("split ratios must sum to a positive value");

  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<DatasetRecord>> parts(ratios.size());
  size_t start = 0;
  for (size_t p = 0; p < ratios.size(); ++p) {
    size_t count = p + 1 == ratios.size()
                       ? records.size() - start
                       : static_cast<size_t>(std::floor(records.size() * ratios[p] / total));
    for (size_t i = 0; i < count && start < records.size(); ++i, ++start)
      parts[p].push_back(records[order[start]]);
  }
  return parts;
}

}  // namespace dbtalk
