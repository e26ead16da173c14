"""Stop-word lists and filters."""


def english():
    return frozenset(
        """
        a about above after again against all am an and any are aren't as at be because been before
        being below between both but by can't cannot could couldn't did didn't do does doesn't doing
        don't down during each few for from further had hadn't has hasn't have haven't having he he'd
        he'll he's her here here's hers herself him himself his how how's i i'd i'll i'm i've if in into
        is isn't it it's its itself let's me more most mustn't my myself no nor not of off on once only
        or other ought our ours ourselves out over own same shan't she she'd she'll she's should
        shouldn't so some such than that that's the their theirs them themselves then there there's
        these they they'd they'll they're they've this those through to too under until up very was
        wasn't we we'd we'll we're we've were weren't what what's when when's where where's which while
        who who's whom why why's with won't would wouldn't you you'd you'll you're you've your yours
        yourself yourselves
        """.split()
    )


def german():
    return frozenset(
        """
        aber alle allem allen aller alles als also am an ander andere anderem anderen anderer anderes
        anderm andern anderr anders auch auf aus bei bin bis bist da damit dann der den des dem die das
        dass derselbe derselben denselben desselben demselben dieselbe dieselben dasselbe dazu dein
        deine deinem deinen deiner deines denn derer dessen dich dir du dies diese diesem diesen dieser
        dieses doch dort durch ein eine einem einen einer eines einig einige einigem einigen einiger
        einiges einmal er ihn ihm es etwas euer eure eurem euren eurer eures fur gegen gewesen hab habe
        haben hat hatte hatten hier hin hinter ich mich mir ihr ihre ihrem ihren ihrer ihres euch im in
        indem ins ist jede jedem jeden jeder jedes jene jenem jenen jener jenes jetzt kann kein keine
        keinem keinen keiner keines konnen konnte machen man manche manchem manchen mancher manches mein
        meine meinem meinen meiner meines mit muss musste nach nicht nichts noch nun nur ob oder ohne
        sehr sein seine seinem seinen seiner seines selbst sich sie ihnen sind so solche solchem solchen
        solcher solches soll sollte sondern sonst uber um und uns unsere unserem unseren unser unseres
        unter viel vom von vor wahrend war waren warst was weg weil weiter welche welchem welchen
        welcher welches wenn werde werden wie wieder will wir wird wirst wo wollen wollte wurde wurden
        zu zum zur zwar zwischen
        """.split()
    )


def french():
    return frozenset(
        """
        au aux avec ce ces dans de des du elle en et eux il ils je la le les leur lui ma mais me meme mes
        moi mon ne nos notre nous on ou par pas pour qu que qui sa se ses son sur ta te tes toi ton tu un
        une vos votre vous c d j l a m n s t y ete etee etees etes etant etante etants etantes suis es est
        sommes etes sont serai seras sera serons serez seront serais serait serions seriez seraient etais
        etait etions etiez etaient fus fut fumes futes furent sois soit soyons soyez soient fusse fusses
        fut fussions fussiez fussent ayant ayante ayantes ayants eu eue eues eus ai as avons avez ont
        aurai auras aura aurons aurez auront aurais aurait aurions auriez auraient avais avait avions
        aviez avaient eut eumes eutes eurent aie aies ait ayons ayez aient eusse eusses eussions eussiez
        eussent
        """.split()
    )


def spanish():
    return frozenset(
        """
        de la que el en y a los del se las por un para con no una su al lo como mas pero sus le ya o este
        si porque esta entre cuando muy sin sobre tambien me hasta hay donde quien desde todo nos durante
        todos uno les ni contra otros ese eso ante ellos e esto mi antes algunos que unos yo otro otras
        otra el tanto esa estos mucho quienes nada muchos cual poco ella estar estas algunas algo nosotros
        mi mis tu te ti tu tus ellas nosotras vosotros vosotras os mio mia mios mias tuyo tuya tuyos tuyas
        suyo suya suyos suyas nuestro nuestra nuestros nuestras vuestro vuestra vuestros vuestras esos
        esas estoy estas esta estamos estais estan este estes estemos esteis esten estare estaras estara
        estaremos estareis estaran
        """.split()
    )


def remove(tokens, language="en", extra=(), keep=()):
    if language == "en":
        banned = set(english())
    elif language == "de":
        banned = set(german())
    elif language == "fr":
        banned = set(french())
    elif language == "es":
        banned = set(spanish())
    else:
        raise ValueError("unsupported language %r" % (language,))
    banned.update(w.lower() for w in extra)
    banned.difference_update(w.lower() for w in keep)
    kept = []
    dropped = {}
    for token in tokens:
        lowered = token.lower()
        if lowered in banned:
            dropped[lowered] = dropped.get(lowered, 0) + 1
        else:
            kept.append(token)
    ratio = len(kept) / float(len(tokens)) if tokens else 1.0
    return {"kept": kept, "dropped": dropped, "ratio": round(ratio, 6)}
