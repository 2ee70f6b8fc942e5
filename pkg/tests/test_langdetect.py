"""Language detection tests with a hand-labeled sentence corpus."""

import pytest

from newsgauge.langdetect import (
    FilterCounts,
    UNDETERMINED,
    detect_language,
    filter_english,
    supported_languages,
)

LONG_EN = ("The city council voted on Tuesday to expand the public library system, "
           "adding evening hours at three branches and funding a mobile service "
           "for outlying villages. Supporters said the change would help students "
           "and older residents who cannot travel during the day.")

EN_SENTENCES = [
    "The committee published its final report on water quality throughout the region.",
    "Researchers found that the new vaccine offered strong protection for older adults.",
    "Heavy rain closed several mountain roads over the weekend, stranding dozens of hikers.",
    "The museum will reopen in April after a two year renovation of its main gallery.",
    "Farmers warned that the late frost could damage this season's fruit harvest badly.",
    "A small bakery on the corner has become the most popular meeting place in town.",
    "The airline announced new direct flights between the two capitals starting in June.",
    "Teachers asked the ministry for smaller classes and better laboratory equipment.",
    "The harbor master reported record traffic through the port during the summer months.",
    "Local historians traced the old bridge back to the first decade of the nineteenth century.",
    "The orchestra performed to a full house despite the snowstorm outside the concert hall.",
    "Engineers finished the tunnel three months ahead of schedule and under budget.",
    "The newspaper celebrated one hundred years of continuous publication this spring.",
    "Volunteers planted more than two thousand trees along the riverbank last autumn.",
    "The mayor promised faster repairs to streetlights after complaints from residents.",
]

# 50 short pieces labeled by hand: 15 English plus five for each of the
# seven other profile languages.
LABELED = [("en", s) for s in EN_SENTENCES] + [
    ("de", "Der Stadtrat stimmte am Dienstag für den Ausbau der öffentlichen Bibliothek."),
    ("de", "Die Forscher fanden heraus, dass der neue Impfstoff älteren Menschen guten Schutz bietet."),
    ("de", "Starker Regen sperrte am Wochenende mehrere Bergstraßen in der Region."),
    ("de", "Das Museum wird im April nach zweijähriger Renovierung wieder eröffnet."),
    ("de", "Die Bauern warnten, dass der späte Frost die Obsternte schwer schädigen könnte."),
    ("fr", "Les élèves de l'école primaire ont préparé un spectacle de fin d'année pour leurs parents."),
    ("fr", "Les chercheurs ont constaté que le nouveau vaccin protège bien les personnes âgées."),
    ("fr", "De fortes pluies ont fermé plusieurs routes de montagne pendant le week-end."),
    ("fr", "Le musée rouvrira en avril après deux années de rénovation de sa grande galerie."),
    ("fr", "Les agriculteurs craignent que le gel tardif n'endommage gravement la récolte de fruits."),
    ("es", "El ayuntamiento votó el martes ampliar la biblioteca pública de la ciudad."),
    ("es", "Los investigadores hallaron que la nueva vacuna protege bien a las personas mayores."),
    ("es", "Las fuertes lluvias cerraron varias carreteras de montaña durante el fin de semana."),
    ("es", "El museo volverá a abrir en abril tras dos años de obras en su galería principal."),
    ("es", "Los agricultores temen que la helada tardía dañe gravemente la cosecha de fruta."),
    ("it", "Il consiglio comunale ha votato martedì per ampliare la biblioteca pubblica della città."),
    ("it", "I ricercatori hanno scoperto che il nuovo vaccino protegge bene le persone anziane."),
    ("it", "Le forti piogge hanno chiuso diverse strade di montagna durante il fine settimana."),
    ("it", "Il museo riaprirà ad aprile dopo due anni di lavori nella galleria principale."),
    ("it", "Gli agricoltori temono che il gelo tardivo possa danneggiare gravemente il raccolto."),
    ("nl", "De gemeenteraad stemde dinsdag voor de uitbreiding van de openbare bibliotheek."),
    ("nl", "Onderzoekers ontdekten dat het nieuwe vaccin ouderen goede bescherming biedt."),
    ("nl", "Hevige regen sloot in het weekend verschillende bergwegen in de streek af."),
    ("nl", "Het museum gaat in april weer open na twee jaar verbouwing van de grote zaal."),
    ("nl", "De boeren waarschuwden dat de late vorst de fruitoogst zwaar kan beschadigen."),
    ("pt", "A câmara municipal votou na terça-feira a ampliação da biblioteca pública da cidade."),
    ("pt", "Os pesquisadores descobriram que a nova vacina protege bem as pessoas idosas."),
    ("pt", "As chuvas fortes fecharam várias estradas de montanha durante o fim de semana."),
    ("pt", "O museu vai reabrir em abril depois de dois anos de obras na galeria principal."),
    ("pt", "Os agricultores temem que a geada tardia prejudique gravemente a colheita de fruta."),
    ("ru", "Городской совет во вторник проголосовал за расширение публичной библиотеки."),
    ("ru", "Исследователи выяснили, что новая вакцина хорошо защищает пожилых людей."),
    ("ru", "Сильные дожди закрыли несколько горных дорог в выходные дни."),
    ("ru", "Музей снова откроется в апреле после двух лет ремонта главного зала."),
    ("ru", "Фермеры опасаются, что поздние заморозки сильно повредят урожай фруктов."),
]


def test_supported_languages_sorted_with_und_last():
    langs = supported_languages()
    assert langs[-1] == UNDETERMINED
    assert list(langs[:-1]) == sorted(langs[:-1])
    assert "en" in langs


def test_long_english_high_confidence():
    verdict = detect_language(LONG_EN)
    assert verdict.language == "en"
    assert verdict.confidence >= 0.9


@pytest.mark.parametrize("lang,text", [
    ("de", "Die Regierung hat diese Woche einen neuen Plan für die Infrastruktur angekündigt."),
    ("fr", "Le gouvernement a annoncé cette semaine un nouveau plan de dépenses pour les régions."),
    ("es", "El gobierno anunció esta semana un nuevo plan de gasto en infraestructuras."),
])
def test_common_languages_recognized(lang, text):
    assert detect_language(text).language == lang


def test_short_text_undetermined():
    verdict = detect_language("Hello there")
    assert verdict == detect_language("Hello there")
    assert verdict.language == UNDETERMINED
    assert verdict.confidence == 0.0


def test_empty_text_undetermined():
    assert detect_language("").language == UNDETERMINED
    assert detect_language("   \n  ").confidence == 0.0


def test_min_chars_is_configurable():
    text = "The committee meets today."
    assert detect_language(text).language == UNDETERMINED
    assert detect_language(text, min_chars=10).language == "en"


def test_determinism():
    a = detect_language(LONG_EN)
    b = detect_language(LONG_EN)
    assert a == b


def test_labeled_corpus_agreement():
    assert len(LABELED) == 50
    hits = sum(1 for want, text in LABELED if detect_language(text).language == want)
    assert hits / len(LABELED) >= 0.98


def test_confidence_bounded():
    for _, text in LABELED:
        v = detect_language(text)
        assert 0.0 <= v.confidence <= 1.0


# ------------------------------------------------------------ filter_english

def _pairs(sentences):
    return [" ".join(sentences[i : i + 2]) for i in range(0, len(sentences), 2)]


def test_filter_english_mixed_batch():
    english = _pairs(EN_SENTENCES[:14])  # 7 two-sentence texts
    german = [
        "Der Zug nach Hamburg hatte am Morgen über eine Stunde Verspätung. "
        "Viele Pendler warteten frierend auf dem Bahnsteig.",
        "Die Stadtwerke erneuern im Sommer die Wasserleitungen in der Altstadt. "
        "Einige Straßen bleiben deshalb wochenlang gesperrt.",
        "Das Theater zeigt ab Oktober eine neue Fassung des bekannten Stücks. "
        "Der Vorverkauf beginnt bereits nächste Woche.",
    ]
    items = english + german
    counters = FilterCounts()
    kept = list(filter_english(items, lambda s: s, threshold=0.8, counters=counters))
    assert [item for item, _ in kept] == english
    assert all(v.language == "en" and v.confidence >= 0.8 for _, v in kept)
    assert counters.input == 10
    assert counters.kept == 7
    assert counters.dropped == 3


def test_filter_english_threshold_one_drops_everything():
    counters = FilterCounts()
    kept = list(filter_english([LONG_EN], lambda s: s, threshold=1.0, counters=counters))
    assert kept == []
    assert counters.dropped == 1


@pytest.mark.parametrize("bad", [0.0, -0.2, 1.5])
def test_filter_english_threshold_validation(bad):
    with pytest.raises(ValueError, match="threshold"):
        list(filter_english([], lambda s: s, threshold=bad))
