#!/usr/bin/env python3
"""Generate the five-language language-ID fixture corpus.

Writes crates/core/tests/fixtures/langid/<lang>/sentences.txt with one
encyclopedia-style sentence per line. Output is deterministic.
"""

import random
from pathlib import Path

PER_LANGUAGE = 220
OUT = Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/langid"

VOCAB = {
    "en": {
        "templates": [
            "{place} is a {size} {kind} located in the {region} of the country.",
            "The {thing} was first described by {person} in {year}.",
            "{person} was a {role} known for work on {field}.",
            "In {year}, the {org} moved its headquarters to {place}.",
            "The {thing} is commonly found in {habitat} and feeds on {food}.",
            "{place} has a population of about {num} people and is known for its {feature}.",
            "The {org} was founded in {year} to promote {field}.",
            "Most {thing}s live in {habitat}, where they build nests from {material}.",
            "During the {century} century, {place} became an important centre of {field}.",
            "The {thing} has a long history and appears in many {media} from {region}.",
        ],
        "place": ["Riverton", "Oakford", "Millbrook", "Ashton", "Kingsport", "Westfield", "Bridgewater", "Fairhaven", "Northwood", "Elmstead"],
        "size": ["small", "large", "historic", "coastal", "rural", "busy", "quiet", "growing"],
        "kind": ["town", "city", "village", "harbour", "district", "county", "market town"],
        "region": ["north", "south", "east", "west", "central highlands", "river valley", "coastal plain"],
        "thing": ["beetle", "sparrow", "river otter", "mountain goat", "oak tree", "freshwater fish", "wild orchid", "grey heron", "field mouse", "red fox"],
        "person": ["John Harris", "Mary Collins", "Thomas Reed", "Alice Morgan", "Henry Walker", "Emily Turner", "George Hill", "Sarah Bennett"],
        "year": [str(y) for y in range(1780, 2011, 7)],
        "role": ["painter", "physicist", "novelist", "composer", "botanist", "politician", "engineer", "historian"],
        "field": ["astronomy", "public education", "modern architecture", "marine biology", "folk music", "railway engineering", "medieval history", "economics"],
        "org": ["society", "museum", "university", "railway company", "football club", "trade union", "orchestra"],
        "habitat": ["wetlands", "dense forests", "open grassland", "rocky coasts", "mountain streams", "farmland"],
        "food": ["insects", "seeds", "small fish", "berries", "leaves", "worms"],
        "num": ["12,000", "45,000", "3,500", "120,000", "8,200", "67,000"],
        "feature": ["cathedral", "annual fair", "old bridge", "textile mills", "sandy beaches", "botanical garden"],
        "material": ["twigs", "mud", "grass", "moss", "feathers"],
        "century": ["seventeenth", "eighteenth", "nineteenth", "twentieth"],
        "media": ["stories", "paintings", "songs", "poems", "legends"],
    },
    "de": {
        "templates": [
            "{place} ist eine {size} {kind} im {region} des Landes.",
            "Die {thing} wurde im Jahr {year} von {person} erstmals beschrieben.",
            "{person} war ein bekannter {role}, der sich mit {field} beschäftigte.",
            "Im Jahr {year} verlegte der {org} seinen Sitz nach {place}.",
            "Die {thing} lebt vor allem in {habitat} und ernährt sich von {food}.",
            "{place} hat etwa {num} Einwohner und ist für seine {feature} bekannt.",
            "Der {org} wurde {year} gegründet, um die {field} zu fördern.",
            "Im {century} Jahrhundert entwickelte sich {place} zu einem Zentrum der {field}.",
            "Die Geschichte der {thing} ist eng mit der Landschaft im {region} verbunden.",
            "Nach dem Krieg wurde die {feature} in {place} vollständig wiederaufgebaut.",
        ],
        "place": ["Lindenau", "Birkenfeld", "Rosenheim", "Steinbach", "Waldkirch", "Neustadt", "Eichenberg", "Hohenfels", "Grünwald", "Tannhausen"],
        "size": ["kleine", "große", "historische", "ländliche", "bedeutende", "ruhige", "wachsende"],
        "kind": ["Stadt", "Gemeinde", "Kreisstadt", "Ortschaft", "Hafenstadt", "Marktgemeinde"],
        "region": ["Norden", "Süden", "Osten", "Westen", "Mittelgebirge", "Flusstal", "Küstengebiet"],
        "thing": ["Eidechse", "Bachforelle", "Wildkatze", "Feldlerche", "Eiche", "Fledermaus", "Libelle", "Wiesenblume", "Kröte", "Haselmaus"],
        "person": ["Johann Müller", "Anna Schneider", "Friedrich Wagner", "Luise Becker", "Heinrich Schulz", "Marie Hoffmann", "Karl Fischer", "Greta Weber"],
        "year": [str(y) for y in range(1781, 2012, 7)],
        "role": ["Maler", "Physiker", "Schriftsteller", "Komponist", "Botaniker", "Politiker", "Ingenieur", "Historiker"],
        "field": ["Sternkunde", "Volksbildung", "Baukunst", "Meeresbiologie", "Volksmusik", "Eisenbahntechnik", "Landesgeschichte", "Wirtschaft"],
        "org": ["Verein", "Verband", "Sportverein", "Chor", "Gewerkschaftsbund", "Heimatverein"],
        "habitat": ["feuchten Wäldern", "offenen Wiesen", "klaren Bächen", "felsigen Hängen", "alten Gärten", "Sumpfgebieten"],
        "food": ["Insekten", "Samen", "kleinen Fischen", "Beeren", "Blättern", "Würmern"],
        "num": ["12.000", "45.000", "3.500", "120.000", "8.200", "67.000"],
        "feature": ["Kirche", "Burg", "Altstadt", "Brücke", "Brauerei", "Bibliothek"],
        "century": ["siebzehnten", "achtzehnten", "neunzehnten", "zwanzigsten"],
    },
    "ja": {
        "templates": [
            "{place}は{region}に位置する{size}{kind}で、{feature}で知られている。",
            "{thing}は{year}年に{person}によって初めて記載された。",
            "{person}は{field}の研究で知られる{role}である。",
            "{year}年、{org}は本部を{place}に移転した。",
            "{thing}は主に{habitat}に生息し、{food}を食べる。",
            "{place}の人口は約{num}人で、毎年多くの観光客が訪れる。",
            "{org}は{field}の振興を目的として{year}年に設立された。",
            "{century}になると、{place}は{field}の中心地として発展した。",
            "{thing}の名前は古くから{media}にも登場し、人々に親しまれてきた。",
            "この地域では{thing}を保護するための取り組みが続けられている。",
        ],
        "place": ["川辺町", "北山市", "桜井村", "松原町", "青葉区", "東浜市", "西ノ宮町", "緑川村", "高岡市", "白石町"],
        "size": ["小さな", "大きな", "歴史ある", "静かな", "海沿いの", "山あいの"],
        "kind": ["町", "都市", "村", "港町", "城下町", "宿場町"],
        "region": ["県の北部", "県の南部", "平野の中央", "川の下流域", "山地の東側", "湾の西岸"],
        "thing": ["カブトムシ", "スズメ", "カワウソ", "ニホンカモシカ", "クスノキ", "アユ", "サギソウ", "アオサギ", "ヤマネ", "キツネ"],
        "person": ["山田太郎", "佐藤花子", "鈴木一郎", "高橋美咲", "田中健二", "伊藤由美", "渡辺誠", "中村さくら"],
        "year": [str(y) for y in range(1782, 2013, 7)],
        "role": ["画家", "物理学者", "小説家", "作曲家", "植物学者", "政治家", "技術者", "歴史学者"],
        "field": ["天文学", "教育", "建築", "海洋生物学", "民謡", "鉄道工学", "郷土史", "経済学"],
        "org": ["協会", "博物館", "大学", "鉄道会社", "楽団", "研究所", "保存会"],
        "habitat": ["湿地", "森林", "草原", "岩の多い海岸", "山間の渓流", "田畑"],
        "food": ["昆虫", "種子", "小魚", "木の実", "葉", "ミミズ"],
        "num": ["一万二千", "四万五千", "三千五百", "十二万", "八千二百", "六万七千"],
        "feature": ["古い寺院", "夏祭り", "石造りの橋", "織物", "砂浜", "植物園"],
        "century": ["江戸時代", "明治時代", "大正時代", "昭和時代"],
        "media": ["和歌", "昔話", "絵巻物", "俳句", "民話"],
    },
    "zh": {
        "templates": [
            "{place}位于{region}，是一座{size}{kind}，以{feature}闻名。",
            "{thing}于{year}年由{person}首次描述。",
            "{person}是一位以{field}研究著称的{role}。",
            "{year}年，{org}将总部迁至{place}。",
            "{thing}主要栖息在{habitat}，以{food}为食。",
            "{place}人口约为{num}人，每年吸引大量游客前来参观。",
            "{org}成立于{year}年，旨在促进{field}的发展。",
            "到了{century}，{place}逐渐发展成为{field}的中心。",
            "{thing}的名字很早就出现在{media}中，深受人们喜爱。",
            "当地政府一直致力于保护{thing}及其生存环境。",
        ],
        "place": ["河边镇", "北山市", "樱井村", "松原县", "青叶区", "东滨市", "西宁镇", "绿川村", "高冈市", "白石镇"],
        "size": ["小型", "大型", "历史悠久的", "宁静的", "沿海的", "山区的"],
        "kind": ["城镇", "城市", "村庄", "港口城市", "古城"],
        "region": ["该省北部", "该省南部", "平原中部", "河流下游", "山地东侧", "海湾西岸"],
        "thing": ["独角仙", "麻雀", "水獭", "羚羊", "樟树", "香鱼", "兰花", "苍鹭", "睡鼠", "狐狸"],
        "person": ["王伟", "李娜", "张强", "刘洋", "陈静", "杨磊", "赵敏", "黄涛"],
        "year": [str(y) for y in range(1783, 2014, 7)],
        "role": ["画家", "物理学家", "小说家", "作曲家", "植物学家", "政治家", "工程师", "历史学家"],
        "field": ["天文学", "教育", "建筑", "海洋生物学", "民歌", "铁路工程", "地方史", "经济学"],
        "org": ["协会", "博物馆", "大学", "铁路公司", "乐团", "研究所"],
        "habitat": ["湿地", "森林", "草原", "多岩石的海岸", "山间溪流", "农田"],
        "food": ["昆虫", "种子", "小鱼", "果实", "树叶", "蚯蚓"],
        "num": ["一万两千", "四万五千", "三千五百", "十二万", "八千二百", "六万七千"],
        "feature": ["古老的寺庙", "夏季庙会", "石桥", "丝织品", "沙滩", "植物园"],
        "century": ["明朝", "清朝", "民国时期", "二十世纪"],
        "media": ["诗歌", "民间故事", "古代画卷", "传说"],
    },
    "ko": {
        "templates": [
            "{place}은 {region}에 위치한 {size} {kind}로, {feature}로 유명하다.",
            "{thing}은 {year}년에 {person}에 의해 처음 기록되었다.",
            "{person}은 {field} 연구로 잘 알려진 {role}이다.",
            "{year}년에 {org}는 본부를 {place}으로 옮겼다.",
            "{thing}은 주로 {habitat}에 서식하며 {food}을 먹는다.",
            "{place}의 인구는 약 {num}명이며 매년 많은 관광객이 찾는다.",
            "{org}는 {field}의 발전을 위해 {year}년에 설립되었다.",
            "{century}에 들어서 {place}은 {field}의 중심지로 성장하였다.",
            "{thing}의 이름은 오래전부터 {media}에도 등장하여 사람들에게 친숙하다.",
            "이 지역에서는 {thing}을 보호하기 위한 노력이 계속되고 있다.",
        ],
        "place": ["강변읍", "북산시", "벚꽃마을", "송원군", "청엽구", "동해시", "서해읍", "녹천마을", "고강시", "백석읍"],
        "size": ["작은", "큰", "역사 깊은", "조용한", "해안의", "산골의"],
        "kind": ["마을", "도시", "항구 도시", "읍", "고을"],
        "region": ["도의 북부", "도의 남부", "평야의 중앙", "강의 하류", "산지의 동쪽", "만의 서쪽"],
        "thing": ["장수풍뎅이", "참새", "수달", "산양", "녹나무", "은어", "난초", "왜가리", "겨울잠쥐", "여우"],
        "person": ["김민준", "이서연", "박지훈", "최수빈", "정우성", "강하늘", "조민지", "윤서준"],
        "year": [str(y) for y in range(1784, 2015, 7)],
        "role": ["화가", "물리학자", "소설가", "작곡가", "식물학자", "정치인", "기술자", "역사학자"],
        "field": ["천문학", "교육", "건축", "해양 생물학", "민요", "철도 공학", "향토사", "경제학"],
        "org": ["협회", "박물관", "대학교", "철도 회사", "악단", "연구소"],
        "habitat": ["습지", "숲", "초원", "바위가 많은 해안", "산골짜기 개울", "논밭"],
        "food": ["곤충", "씨앗", "작은 물고기", "열매", "나뭇잎", "지렁이"],
        "num": ["1만 2천", "4만 5천", "3천 5백", "12만", "8천 2백", "6만 7천"],
        "feature": ["오래된 사찰", "여름 축제", "돌다리", "직물", "모래사장", "식물원"],
        "century": ["조선 시대", "고려 시대", "근대", "20세기"],
        "media": ["시조", "옛이야기", "그림", "전설"],
    },
}


def fill(template, vocab, rng):
    out = template
    while "{" in out:
        start = out.index("{")
        end = out.index("}", start)
        key = out[start + 1:end]
        out = out[:start] + rng.choice(vocab[key]) + out[end + 1:]
    return out


def main():
    rng = random.Random(20231)
    for lang in sorted(VOCAB):
        vocab = VOCAB[lang]
        seen = set()
        lines = []
        while len(lines) < PER_LANGUAGE:
            s = fill(rng.choice(vocab["templates"]), vocab, rng)
            if s not in seen:
                seen.add(s)
                lines.append(s)
        d = OUT / lang
        d.mkdir(parents=True, exist_ok=True)
        (d / "sentences.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(lang, len(lines))


if __name__ == "__main__":
    main()
