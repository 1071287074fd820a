#!/usr/bin/env python3
"""Regenerates the mini corpus used by the end-to-end tests.

The corpus is synthetic. Every document is assembled from fixed word lists
with a seeded generator, and a handful of documents are built to trip one
specific cleaning, filtering or dedup rule each. Run from any directory:

    python3 data/mini/generate.py
"""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(20210426)

SUBJECTS = ["研究人员", "这座城市", "我们的团队", "当地居民", "许多学生", "这家工厂", "老师们", "科学家",
            "年轻的工程师", "附近的农民", "这个社区", "图书馆", "博物馆", "医院", "政府部门", "志愿者"]
VERBS = ["发现了", "建设了", "讨论了", "改进了", "记录了", "分析了", "保护了", "介绍了", "观察了",
         "整理了", "研究了", "推广了", "设计了", "完成了", "准备了", "支持了"]
OBJECTS = ["新的种植方法", "河流两岸的环境", "古老的建筑", "历史文献", "传统手工艺", "天气变化的规律",
           "城市交通系统", "森林里的鸟类", "清洁能源项目", "儿童阅读计划", "山区的道路", "海洋生物",
           "地方戏曲", "农作物的产量", "公共卫生条件", "节约用水的办法"]
TAILS = ["并取得了明显的效果", "受到了广泛的关注", "为后续工作打下了基础", "得到了大家的认可",
         "积累了宝贵的经验", "还需要进一步的验证", "帮助了更多的人", "在今年春天正式开始",
         "吸引了很多参观者", "显示出良好的前景"]
CONNECT = ["此外，", "同时，", "据介绍，", "另外，", "因此，", "随后，", "总的来说，", ""]

SPAM_WORDS = ["日赚千元", "轻松赚钱", "兼职刷单", "高额返利", "躺着赚钱", "加群领红包", "稳赚不赔",
              "零投入创业", "快速致富", "网络兼职", "私聊带你", "内部渠道"]
TRADITIONAL = ["這個國家的學生們", "圖書館裡的書籍", "經濟發展與環境", "歷史與傳統"]
NAV_BAR = "首页 | 新闻 | 体育 | 财经 | 娱乐 | 科技 | 汽车"
AD_WORDS = ["优惠券", "限时折扣", "立即抢购", "包邮", "扫码关注"]
SENSITIVE = ["赌博", "诈骗", "毒品", "走私", "洗钱"]


def sentence():
    return (rng.choice(CONNECT) + rng.choice(SUBJECTS) + rng.choice(VERBS) + rng.choice(OBJECTS) + "，" +
            rng.choice(TAILS) + "。")


def paragraph(n):
    return "".join(sentence() for _ in range(n))


def article(paragraphs=3, sentences=4):
    return "\n".join(paragraph(sentences) for _ in range(paragraphs))


def spam_text():
    parts = []
    for _ in range(30):
        parts.append(rng.choice(SPAM_WORDS))
        parts.append(rng.choice(["！", "，", "。"]))
    return "".join(parts)


def garbled_text(n=220):
    # Uniform draws over the CJK block: Chinese characters, no language.
    return "".join(chr(rng.randrange(0x4E00, 0x9FA6)) for _ in range(n))


def near_copy(text):
    # Replaces one sentence at the end, keeping Jaccard well above 0.8.
    return text[: text.rfind("。", 0, len(text) - 1) + 1] + sentence()


def write_jsonl(path, records, extra_lines=()):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
        for line in extra_lines:
            f.write(line + "\n")


def main():
    raw = HERE / "raw"
    raw.mkdir(exist_ok=True)

    # Common Crawl: the noisiest source, so every cleaning rule fires here.
    cc = []
    for i in range(120):
        cc.append({"url": f"http://example.com/page/{i}", "text": article(3, 4)})
    for i in range(6):
        cc[i]["text"] = NAV_BAR + "\n" + cc[i]["text"] + "\n" + NAV_BAR
    for i in range(6, 12):
        lines = cc[i]["text"].split("\n")
        cc[i]["text"] = "\n".join(lines + [lines[0]])
    for i in range(12, 18):
        cc[i]["text"] = TRADITIONAL[i % len(TRADITIONAL)] + "。" + cc[i]["text"]
    for i in range(18, 24):
        cc[i]["text"] = cc[i]["text"].replace("。", "。\u0007", 1) + "！！！！！"
    for i in range(4):
        cc.append({"url": f"http://example.com/title/{i}", "title": "今日要闻", "text": "今日要闻"})
    for i in range(4):
        cc.append({"url": f"http://example.com/en/{i}",
                   "text": "This page is mostly written in English with only a few Chinese words 中文 mixed in. " * 4})
    for i in range(4):
        cc.append({"url": f"http://example.com/short/{i}", "text": sentence()})
    for i in range(4):
        cc.append({"url": f"http://example.com/ad/{i}",
                   "text": article(2, 4) + "\n" + "".join(w + "！" for w in AD_WORDS)})
    for i in range(4):
        cc.append({"url": f"http://example.com/bad/{i}",
                   "text": article(2, 4) + "\n" + "，".join(SENSITIVE) + "。"})
    for i in range(6):
        cc.append({"url": f"http://example.com/spam/{i}", "text": spam_text() + "\n" + spam_text()})
    for i in range(6):
        cc.append({"url": f"http://example.com/garbled/{i}", "text": garbled_text()})
    for i in range(10):
        src = cc[30 + i]
        cc.append({"url": src["url"] + "?copy=1", "text": near_copy(src["text"])})
    rng.shuffle(cc)
    write_jsonl(raw / "common_crawl.jsonl", cc,
                extra_lines=['{"url": "http://example.com/broken", "text": ', '{"title": "no text field"}'])

    # Public datasets arrive labeled; the labels are stripped at ingestion.
    public = []
    for i in range(40):
        public.append({"id": i, "question": paragraph(2), "answer": paragraph(3), "label": rng.randrange(2)})
    public.append({"id": 99, "label": 1})
    write_jsonl(raw / "public.jsonl", public, extra_lines=["not json at all"])

    write_jsonl(raw / "encyclopedia.jsonl",
                [{"title": f"词条{i}", "text": article(4, 3)} for i in range(30)])
    ebooks = [{"title": f"第{i}章", "text": article(6, 5)} for i in range(20)]
    ebooks.append({"title": "附录", "text": article(2, 4) + "\n" + "，".join(SENSITIVE) + "。"})
    write_jsonl(raw / "ebooks.jsonl", ebooks)
    news = [{"url": f"http://news.example.com/{i}", "text": article(3, 4)} for i in range(40)]
    news.append({"url": "http://news.example.com/copy", "text": near_copy(news[5]["text"])})
    write_jsonl(raw / "news.jsonl", news)

    train = HERE / "train"
    train.mkdir(exist_ok=True)
    (train / "spam_pos.txt").write_text("\n".join(spam_text() for _ in range(200)) + "\n", encoding="utf-8")
    # Garbled text is low quality but not spam; teach the spam model that too.
    spam_neg = [paragraph(6) for _ in range(150)] + [garbled_text() for _ in range(50)]
    (train / "spam_neg.txt").write_text("\n".join(spam_neg) + "\n", encoding="utf-8")
    (train / "quality_pos.txt").write_text("\n".join(paragraph(6) for _ in range(200)) + "\n", encoding="utf-8")
    (train / "quality_neg.txt").write_text("\n".join(garbled_text() for _ in range(200)) + "\n", encoding="utf-8")
    (HERE / "dev.txt").write_text("\n".join(paragraph(3) for _ in range(60)) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
