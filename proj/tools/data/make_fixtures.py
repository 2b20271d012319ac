#!/usr/bin/env python3
# Copyright 2026 The pinyin-ime Authors
# SPDX-License-Identifier: Apache-2.0
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the hermetic test fixtures under data/.

Outputs (all deterministic for a given seed):
  data/corpus/{daily,tech,travel}.txt   domain corpora, one sentence per line
  data/corpus/toy200.txt                fixed 200-sentence training corpus
  data/corpus/ablation_{train,heldout}.txt
  data/lexicon/lexicon_small.tsv        char<TAB>syllable<TAB>rank
  data/lexicon/syllable_table.tsv       syllable<TAB>initial<TAB>final

Needs pypinyin and jieba (pip install pypinyin jieba). The committed files
are what the tests read; this script only has to run when they change.
"""

import argparse
import collections
import os
import random

import jieba
from pypinyin import Style, pinyin
from pypinyin.contrib.tone_convert import to_normal
from pypinyin.pinyin_dict import pinyin_dict
from pypinyin.style._utils import get_initials

FINALS = {
    "a", "ai", "an", "ang", "ao", "e", "ei", "en", "eng", "er", "i", "ia",
    "ian", "iang", "iao", "ie", "in", "ing", "iong", "iu", "o", "ong", "ou",
    "u", "ua", "uai", "uan", "uang", "ue", "ui", "un", "uo", "v", "ve",
}

# Slot vocabularies shared by the templates below.
W = {
    "who": ["我", "我们", "他", "她", "你", "老师", "同学们", "妈妈", "爸爸", "朋友",
            "小王", "小李", "哥哥", "姐姐", "邻居", "大家", "经理", "医生"],
    "when": ["今天", "明天", "昨天", "下周", "周末", "晚上", "早上", "中午", "下午",
             "上个月", "明年", "每天", "最近", "刚才", "春节", "国庆节"],
    "place": ["学校", "公司", "医院", "超市", "图书馆", "公园", "车站", "机场",
              "饭店", "银行", "商场", "体育馆", "博物馆", "电影院", "咖啡馆", "办公室"],
    "city": ["北京", "上海", "广州", "深圳", "杭州", "成都", "西安", "南京",
             "重庆", "武汉", "苏州", "青岛", "厦门", "昆明", "大连", "长沙"],
    "food": ["米饭", "面条", "饺子", "包子", "火锅", "烤鸭", "水果", "蛋糕",
             "牛肉", "鸡蛋", "豆腐", "青菜", "馒头", "西瓜", "苹果", "鱼汤"],
    "drink": ["茶", "咖啡", "牛奶", "果汁", "啤酒", "开水", "可乐", "豆浆"],
    "act": ["开会", "上课", "考试", "加班", "锻炼", "购物", "看书", "写作业",
            "打球", "跑步", "学习", "工作", "休息", "做饭", "散步", "唱歌"],
    "thing": ["手机", "电脑", "书包", "雨伞", "钥匙", "眼镜", "衣服", "钱包",
              "照片", "报告", "文件", "礼物", "地图", "车票", "护照", "杂志"],
    "adj": ["很好", "不错", "非常忙", "有点累", "特别开心", "很舒服", "太贵了",
            "很方便", "很便宜", "有意思", "很安静", "很热闹", "挺难的", "很简单"],
    "weather": ["晴天", "下雨", "下雪", "多云", "刮风", "阴天"],
    "tech": ["软件", "系统", "程序", "数据", "网络", "服务器", "模型", "算法",
             "数据库", "接口", "应用", "平台", "芯片", "硬盘", "网站", "代码"],
    "techact": ["升级", "测试", "部署", "优化", "更新", "发布", "维护", "设计",
                "开发", "调试", "备份", "安装", "重启", "修复", "训练", "分析"],
    "problem": ["速度太慢", "经常出错", "内存不够", "连接失败", "性能下降",
                "无法登录", "数据丢失", "运行异常", "响应超时", "结果不对"],
    "sight": ["长城", "故宫", "西湖", "外滩", "黄山", "泰山", "兵马俑", "鼓浪屿",
              "天安门", "大熊猫基地", "夫子庙", "洱海", "丽江古城", "九寨沟"],
    "trans": ["坐飞机", "坐火车", "坐高铁", "开车", "坐地铁", "坐公交车", "骑自行车", "打车"],
    "num": ["一", "两", "三", "四", "五", "六", "七", "八", "九", "十"],
    "unit": ["个小时", "天", "个星期", "个月", "分钟"],
}

DAILY = [
    "{when}{who}要去{place}{act}。",
    "{who}{when}在{place}{act}，感觉{adj}。",
    "{who}觉得这家{place}的{food}{adj}。",
    "{when}{who}想吃{food}，还想喝一杯{drink}。",
    "{who}的{thing}忘在{place}了，{when}得回去拿。",
    "{when}是{weather}，{who}不想出门{act}。",
    "{who}每天{act}{num}{unit}，身体越来越好。",
    "我下周有时间，除了{when}有点事。",
    "{who}说{when}一起去{place}{act}吧。",
    "{who}刚买了一个新{thing}，用起来{adj}。",
    "{when}{who}在家{act}，晚上再去{place}。",
    "请问{place}怎么走，我找不到{thing}了。",
    "{who}给{who}带了{food}和{drink}。",
    "{when}天气{adj}，{who}打算去{place}{act}。",
    "{who}在{place}等了{num}{unit}，还是没有看到{who}。",
]

TECH = [
    "{when}我们要对{tech}进行{techact}。",
    "这个{tech}最近{problem}，需要尽快{techact}。",
    "{who}负责{tech}的{techact}工作，进展{adj}。",
    "新版本的{tech}已经{techact}完成，{when}正式上线。",
    "如果{tech}{problem}，请先检查{tech}的配置。",
    "{who}花了{num}{unit}来{techact}这个{tech}。",
    "我们的{tech}和{tech}之间的接口{problem}。",
    "{when}团队开会讨论{tech}的{techact}方案。",
    "{tech}{techact}以后，用户反馈{adj}。",
    "为了解决{problem}的问题，{who}重新{techact}了{tech}。",
    "这个项目需要一个新的{tech}来支持{tech}的{techact}。",
    "{who}建议先{techact}{tech}，然后再{techact}{tech}。",
]

TRAVEL = [
    "{when}我们{trans}去{city}旅游。",
    "{who}在{city}玩了{num}{unit}，参观了{sight}。",
    "从{city}到{city}{trans}大概要{num}{unit}。",
    "{city}的{food}{adj}，一定要尝一尝。",
    "{when}{who}打算{trans}去看{sight}。",
    "{sight}的风景{adj}，游客特别多。",
    "{who}在{city}的{place}买了很多{thing}。",
    "到了{city}以后，{who}先去{place}换钱。",
    "{when}{city}是{weather}，记得带{thing}。",
    "{who}推荐我们去{city}看{sight}，顺便吃{food}。",
    "我们在{city}住了{num}{unit}，每天都去{place}。",
    "{who}说{city}的交通{adj}，可以{trans}。",
]

DOMAINS = {"daily": DAILY, "tech": TECH, "travel": TRAVEL}


def fill(template, rng):
    out = []
    i = 0
    while i < len(template):
        if template[i] == "{":
            j = template.index("}", i)
            out.append(rng.choice(W[template[i + 1:j]]))
            i = j + 1
        else:
            out.append(template[i])
            i += 1
    return "".join(out)


def sentences(templates, n, rng, join_prob=0.35):
    seen = set()
    result = []
    while len(result) < n:
        s = fill(rng.choice(templates), rng)
        # Some long sentences so that the 10+/10+ configurations are feasible.
        if rng.random() < join_prob:
            s = s[:-1] + "，" + fill(rng.choice(templates), rng)
        if s not in seen:
            seen.add(s)
            result.append(s)
    return result


def syllables_of(ch):
    out = []
    for r in pinyin(ch, style=Style.NORMAL, heteronym=True)[0]:
        r = r.replace("ü", "v")
        ini = get_initials(r, strict=False)
        if r[len(ini):] in FINALS and r not in out:
            out.append(r)
    return out[:2]


def char_frequencies():
    path = os.path.join(os.path.dirname(jieba.__file__), "dict.txt")
    freq = collections.Counter()
    with open(path, encoding="utf-8") as f:
        for line in f:
            word, count = line.split()[:2]
            for ch in word:
                if "一" <= ch <= "鿿":
                    freq[ch] += int(count)
    return freq


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "..", "data"))
    ap.add_argument("--seed", type=int, default=20220519)
    ap.add_argument("--lexicon-size", type=int, default=900)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    corpus_dir = os.path.join(args.out, "corpus")
    lex_dir = os.path.join(args.out, "lexicon")
    os.makedirs(corpus_dir, exist_ok=True)
    os.makedirs(lex_dir, exist_ok=True)

    pools = {}
    for name, templates in DOMAINS.items():
        pools[name] = sentences(templates, 700, rng)
        with open(os.path.join(corpus_dir, name + ".txt"), "w", encoding="utf-8") as f:
            f.write("\n".join(pools[name]) + "\n")

    mixed = [s for name in DOMAINS for s in pools[name]]
    rng.shuffle(mixed)
    with open(os.path.join(corpus_dir, "toy200.txt"), "w", encoding="utf-8") as f:
        f.write("\n".join(mixed[:200]) + "\n")
    with open(os.path.join(corpus_dir, "ablation_train.txt"), "w", encoding="utf-8") as f:
        f.write("\n".join(mixed[200:1700]) + "\n")
    with open(os.path.join(corpus_dir, "ablation_heldout.txt"), "w", encoding="utf-8") as f:
        f.write("\n".join(mixed[1700:1900]) + "\n")

    # Lexicon: every corpus character plus the most frequent characters
    # overall, ordered by frequency.
    freq = char_frequencies()
    used = {ch for s in mixed for ch in s if "一" <= ch <= "鿿"}
    ranked = sorted(freq, key=lambda c: (-freq[c], c))
    chosen = set(used)
    for ch in ranked:
        if len(chosen) >= args.lexicon_size:
            break
        chosen.add(ch)
    order = sorted(chosen, key=lambda c: (-freq.get(c, 0), c))
    with open(os.path.join(lex_dir, "lexicon_small.tsv"), "w", encoding="utf-8") as f:
        f.write("# char\tsyllable\trank; rows for one char are in preference order\n")
        for rank, ch in enumerate(order, 1):
            for syl in syllables_of(ch):
                f.write(f"{ch}\t{syl}\t{rank}\n")

    table = set()
    for readings in pinyin_dict.values():
        for r in readings.split(","):
            r = to_normal(r).replace("ü", "v")
            ini = get_initials(r, strict=False)
            if r[len(ini):] in FINALS:
                table.add((r, ini, r[len(ini):]))
    with open(os.path.join(lex_dir, "syllable_table.tsv"), "w", encoding="utf-8") as f:
        f.write("# syllable\tinitial\tfinal (standard Hanyu Pinyin table)\n")
        for syl, ini, fin in sorted(table):
            f.write(f"{syl}\t{ini}\t{fin}\n")


if __name__ == "__main__":
    main()
