#include "spamlens/translate.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "spamlens/errors.hpp"

namespace spamlens {

namespace {

// entry: english word, foreign word, english word returned on the way back
// (empty -> round trip returns the original word).
struct Entry {
  const char* en;
  const char* foreign;
  const char* back;
};

const Entry kGerman[] = {
    {"free", "gratis", "complimentary"}, {"win", "gewinnen", "earn"},
    {"winner", "gewinner", "victor"},    {"cash", "bargeld", "money"},
    {"prize", "preis", "reward"},        {"claim", "fordern", "collect"},
    {"urgent", "dringend", "immediate"}, {"call", "anrufen", "phone"},
    {"now", "jetzt", "immediately"},     {"mobile", "handy", "phone"},
    {"text", "nachricht", "message"},    {"txt", "kurznachricht", "text"},
    {"reply", "antworten", "respond"},   {"stop", "halt", "end"},
    {"send", "senden", "deliver"},       {"today", "heute", "tonight"},
    {"offer", "angebot", "deal"},        {"voucher", "gutschein", "coupon"},
    {"award", "auszeichnung", "prize"},  {"awarded", "verliehen", "granted"},
    {"guaranteed", "garantiert", "assured"},
    {"selected", "ausgewaehlt", "chosen"},
    {"customer", "kunde", "client"},     {"service", "dienst", "support"},
    {"contact", "kontakt", "reach"},     {"bonus", "bonus", "extra"},
    {"chance", "chance", "opportunity"}, {"draw", "ziehung", "raffle"},
    {"entry", "eintrag", "ticket"},      {"great", "toll", "wonderful"},
    {"good", "gut", "nice"},             {"home", "zuhause", "house"},
    {"tomorrow", "morgen", "tmrw"},      {"tonight", "heute abend", "tonite"},
    {"meet", "treffen", "see"},          {"love", "liebe", "luv"},
    {"sorry", "entschuldigung", "sry"},  {"later", "spaeter", "afterwards"},
    {"dinner", "abendessen", "supper"},  {"waiting", "warten", "expecting"},
    {"happy", "gluecklich", "glad"},     {"friend", "freund", "mate"},
    {"please", "bitte", "pls"},          {"thanks", "danke", "thx"},
    {"week", "woche", "wk"},             {"money", "geld", "cash"},
    {"phone", "telefon", "mobile"},      {"number", "nummer", "digits"},
    {"urgently", "dringendst", "urgent"},
};

const Entry kFrench[] = {
    {"free", "gratuit", "free of charge"}, {"win", "gagner", "win"},
    {"winner", "gagnant", "winner"},       {"cash", "especes", "cash"},
    {"prize", "prix", "jackpot"},          {"claim", "reclamer", "redeem"},
    {"urgent", "urgente", "pressing"},     {"call", "appeler", "ring"},
    {"now", "maintenant", "right away"},   {"mobile", "portable", "cell"},
    {"text", "texte", "note"},             {"reply", "repondre", "answer"},
    {"stop", "arret", "quit"},             {"send", "envoyer", "forward"},
    {"today", "aujourdhui", "this day"},   {"offer", "offre", "promotion"},
    {"voucher", "bon", "token"},           {"award", "recompense", "trophy"},
    {"guaranteed", "garanti", "certain"},  {"selected", "choisi", "picked"},
    {"customer", "client", "customer"},    {"service", "service", "helpdesk"},
    {"bonus", "prime", "bonus"},           {"chance", "occasion", "shot"},
    {"great", "formidable", "fantastic"},  {"good", "bon", "fine"},
    {"home", "maison", "home"},            {"tomorrow", "demain", "tomorrow"},
    {"meet", "rencontrer", "meet up"},     {"love", "amour", "love"},
    {"sorry", "desole", "apologies"},      {"later", "plus tard", "later on"},
    {"dinner", "diner", "meal"},           {"happy", "heureux", "cheerful"},
    {"friend", "ami", "buddy"},            {"please", "sil te plait", "please"},
    {"thanks", "merci", "many thanks"},    {"money", "argent", "funds"},
    {"phone", "telephone", "handset"},     {"number", "numero", "number"},
    {"week", "semaine", "week"},           {"waiting", "attente", "waiting"},
};

const Entry kSpanish[] = {
    {"free", "gratis", "free"},           {"win", "ganar", "score"},
    {"winner", "ganador", "champ"},       {"cash", "efectivo", "money"},
    {"prize", "premio", "prize"},         {"claim", "reclamar", "claim"},
    {"urgent", "urgente", "urgent"},      {"call", "llamar", "dial"},
    {"now", "ahora", "now"},              {"mobile", "movil", "cellphone"},
    {"text", "texto", "text"},            {"reply", "responder", "reply back"},
    {"stop", "parar", "stop"},            {"send", "enviar", "submit"},
    {"today", "hoy", "today"},            {"offer", "oferta", "bargain"},
    {"voucher", "cupon", "voucher"},      {"award", "galardon", "honour"},
    {"guaranteed", "garantizado", "guaranteed"},
    {"selected", "seleccionado", "shortlisted"},
    {"customer", "cliente", "patron"},    {"service", "servicio", "service"},
    {"bonus", "bono", "perk"},            {"chance", "oportunidad", "chance"},
    {"great", "genial", "great"},         {"good", "bueno", "good"},
    {"home", "casa", "home"},             {"tomorrow", "manana", "tomorrow"},
    {"meet", "encontrar", "catch up"},    {"love", "amor", "love"},
    {"sorry", "perdon", "so sorry"},      {"later", "luego", "later"},
    {"dinner", "cena", "dinner"},         {"happy", "feliz", "joyful"},
    {"friend", "amigo", "pal"},           {"please", "por favor", "please"},
    {"thanks", "gracias", "cheers"},      {"money", "dinero", "money"},
    {"phone", "telefono", "phone"},       {"number", "numero", "num"},
    {"week", "semana", "week"},           {"waiting", "esperando", "waiting"},
};

std::string lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_upper(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

std::string match_case(std::string word, const std::string& like) {
  if (starts_upper(like) && !word.empty()) {
    word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  }
  return word;
}

std::string map_words(
    const std::string& text,
    const std::unordered_map<std::string, std::string>& table) {
  std::istringstream in(text);
  std::string word;
  std::string out;
  while (in >> word) {
    std::string mapped = word;
    auto it = table.find(word);
    if (it == table.end()) it = table.find(lower(word));
    if (it != table.end()) mapped = match_case(it->second, word);
    if (!out.empty()) out.push_back(' ');
    out += mapped;
  }
  return out;
}

}  // namespace

OfflineProvider::OfflineProvider() {
  auto install = [&](const std::string& code, const Entry* entries,
                     std::size_t n) {
    LangTable table;
    for (std::size_t i = 0; i < n; ++i) {
      const Entry& e = entries[i];
      table.to_foreign[e.en] = e.foreign;
      table.to_english[e.foreign] =
          (e.back != nullptr && e.back[0] != '\0') ? e.back : e.en;
    }
    tables_[code] = std::move(table);
  };
  install("de", kGerman, std::size(kGerman));
  install("fr", kFrench, std::size(kFrench));
  install("es", kSpanish, std::size(kSpanish));
}

std::vector<std::string> OfflineProvider::supported_languages() const {
  std::vector<std::string> codes;
  for (const auto& [code, _] : tables_) codes.push_back(code);
  std::sort(codes.begin(), codes.end());
  return codes;
}

std::string OfflineProvider::translate(const std::string& text,
                                       const std::string& source_lang,
                                       const std::string& target_lang) const {
  if (source_lang == "en") {
    auto it = tables_.find(target_lang);
    if (it == tables_.end()) {
      throw ProviderError("offline provider: unsupported language '" +
                          target_lang + "'");
    }
    return map_words(text, it->second.to_foreign);
  }
  if (target_lang == "en") {
    auto it = tables_.find(source_lang);
    if (it == tables_.end()) {
      throw ProviderError("offline provider: unsupported language '" +
                          source_lang + "'");
    }
    return map_words(text, it->second.to_english);
  }
  throw ProviderError("offline provider: one side of the pair must be 'en'");
}

RestProvider::RestProvider(RestProviderConfig config)
    : config_(std::move(config)) {
  std::string rest = config_.endpoint;
  const std::string http = "http://";
  if (rest.rfind(http, 0) != 0) {
    throw UsageError("rest provider endpoint must start with http://");
  }
  rest = rest.substr(http.size());
  const std::size_t slash = rest.find('/');
  std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  const std::size_t colon = hostport.find(':');
  if (colon == std::string::npos) {
    host_ = hostport;
    port_ = 80;
  } else {
    host_ = hostport.substr(0, colon);
    port_ = std::stoi(hostport.substr(colon + 1));
  }
  if (host_.empty()) throw UsageError("rest provider endpoint has no host");
}

std::string RestProvider::translate(const std::string& text,
                                    const std::string& source_lang,
                                    const std::string& target_lang) const {
  nlohmann::json body = {
      {"q", text}, {"source", source_lang}, {"target", target_lang}};
  if (!config_.api_key.empty()) body["api_key"] = config_.api_key;
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Client client(host_, port_);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(0, config_.timeout_ms * 1000);
    auto res = client.Post(path_, payload, "application/json");
    if (!res) {
      last_error = "connection to " + config_.endpoint + " failed";
      continue;
    }
    if (res->status != 200) {
      last_error = config_.endpoint + " returned HTTP " +
                   std::to_string(res->status);
      continue;
    }
    try {
      auto parsed = nlohmann::json::parse(res->body);
      return parsed.at("translatedText").get<std::string>();
    } catch (const std::exception& e) {
      last_error = std::string("bad response body: ") + e.what();
    }
  }
  throw ProviderError("translation to '" + target_lang + "' failed: " +
                      last_error);
}

}  // namespace spamlens
